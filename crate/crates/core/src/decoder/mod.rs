//! Maximum-likelihood decoders over the four logical cosets.
//!
//! Coset `k` is the set of chains `R * L_{k xor E(R)} * S` for a fixed
//! representative `R` of the syndrome, so `log_p[k]` always refers to the
//! absolute class `k` regardless of which representative seeded the sum.

mod exact;
mod mps;
mod repetition;

use serde::{Deserialize, Serialize};

use crate::code::{CodeFamily, CodeSpec, EquivClass, Syndrome};
use crate::error::{Error, Result};
use crate::noise::{Bias, NoiseParams};
use crate::pauli::PauliString;

pub use exact::EXACT_CHECK_LIMIT;

/// Coset weights indexed by `EquivClass::index()`, i.e. in the order (I, X, Z, Y).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CosetProbabilities {
    pub log_p: [f64; 4],
    pub normalized: [f64; 4],
}

impl CosetProbabilities {
    pub fn from_log_weights(log_p: [f64; 4]) -> Result<Self> {
        let max = log_p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Degenerate(format!("every coset weight underflowed: {log_p:?}")));
        }
        let w = log_p.map(|l| (l - max).exp());
        let total: f64 = w.iter().sum();
        Ok(Self {
            log_p,
            normalized: w.map(|x| x / total),
        })
    }

    pub fn get(&self, class: EquivClass) -> f64 {
        self.normalized[class.index()]
    }
}

/// Most likely class, ties within `1e-12` relative broken as I, Z, X, Y.
pub fn decode_class(c: &CosetProbabilities) -> EquivClass {
    let best = c.normalized.iter().copied().fold(0.0, f64::max);
    [EquivClass::I, EquivClass::Z, EquivClass::X, EquivClass::Y]
        .into_iter()
        .find(|k| c.get(*k) >= best * (1.0 - 1e-12))
        .unwrap_or(EquivClass::I)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    #[default]
    Rows,
    Columns,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rows" | "row" => Ok(Self::Rows),
            "columns" | "cols" | "column" => Ok(Self::Columns),
            other => Err(Error::Parse(format!("unknown contraction axis {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub chi: usize,
    pub svd_cutoff: f64,
    #[serde(default)]
    pub axis: SweepAxis,
}

impl DecoderConfig {
    pub const DEFAULT_CUTOFF: f64 = 1e-16;

    /// `chi = 16` below `eta = 30`, `chi = 8` from there on.
    pub fn for_bias(eta: Bias) -> Self {
        let chi = match eta {
            Bias::Finite(e) if e < 30.0 => 16,
            _ => 8,
        };
        Self {
            chi,
            svd_cutoff: Self::DEFAULT_CUTOFF,
            axis: SweepAxis::Rows,
        }
    }

    pub fn with_chi(chi: usize) -> Self {
        Self {
            chi,
            svd_cutoff: Self::DEFAULT_CUTOFF,
            axis: SweepAxis::Rows,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi == 0 {
            return Err(Error::OutOfRange("chi must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.svd_cutoff) {
            return Err(Error::OutOfRange(format!("svd_cutoff {} outside [0, 1)", self.svd_cutoff)));
        }
        Ok(())
    }
}

/// Decoding method. Stateless apart from configuration; share freely across threads.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Decoder {
    /// Stabilizer-group enumeration, or the 1D transfer sum for the repetition code.
    Exact,
    Mps(DecoderConfig),
}

impl Decoder {
    pub fn supports(&self, family: CodeFamily) -> bool {
        match self {
            Decoder::Exact => true,
            Decoder::Mps(_) => family.is_surface(),
        }
    }

    pub fn chi(&self) -> usize {
        match self {
            Decoder::Exact => 0,
            Decoder::Mps(cfg) => cfg.chi,
        }
    }

    pub fn coset_probabilities(&self, code: &CodeSpec, noise: &NoiseParams, s: &Syndrome) -> Result<CosetProbabilities> {
        match self {
            Decoder::Exact => coset_probabilities_exact(code, noise, s),
            Decoder::Mps(cfg) => coset_probabilities_mps(code, noise, s, cfg),
        }
    }

    /// Coset probabilities seeded from an arbitrary chain instead of the canonical representative.
    pub fn coset_probabilities_for_chain(
        &self,
        code: &CodeSpec,
        noise: &NoiseParams,
        chain: &PauliString,
    ) -> Result<CosetProbabilities> {
        if chain.len() != code.n {
            return Err(Error::LengthMismatch {
                left: chain.len(),
                right: code.n,
            });
        }
        match self {
            Decoder::Exact if code.family == CodeFamily::Repetition => repetition::coset_probabilities(code, noise, chain),
            Decoder::Exact => exact::coset_probabilities(code, noise, chain),
            Decoder::Mps(cfg) => {
                check_mps(code, cfg)?;
                mps::coset_probabilities(code, noise, chain, cfg)
            }
        }
    }
}

/// The four seed chains `R * L_{k xor E(R)}`, one per absolute class `k`.
pub(crate) fn class_chains(code: &CodeSpec, rep: &PauliString) -> [PauliString; 4] {
    let base = code.class_unchecked(rep);
    EquivClass::ALL.map(|k| {
        let mut c = rep.clone();
        c.mul_assign_unchecked(&code.logical(k.compose(base)));
        c
    })
}

pub fn coset_probabilities_exact(code: &CodeSpec, noise: &NoiseParams, s: &Syndrome) -> Result<CosetProbabilities> {
    let rep = code.representative(s)?;
    Decoder::Exact.coset_probabilities_for_chain(code, noise, &rep)
}

fn check_mps(code: &CodeSpec, cfg: &DecoderConfig) -> Result<()> {
    if !code.family.is_surface() {
        return Err(Error::UnsupportedFamily {
            op: "coset_probabilities_mps",
            family: code.family,
        });
    }
    cfg.validate()
}

pub fn coset_probabilities_mps(
    code: &CodeSpec,
    noise: &NoiseParams,
    s: &Syndrome,
    cfg: &DecoderConfig,
) -> Result<CosetProbabilities> {
    check_mps(code, cfg)?;
    let rep = code.representative(s)?;
    mps::coset_probabilities(code, noise, &rep, cfg)
}

pub fn repetition_coset_probabilities(code: &CodeSpec, noise: &NoiseParams, s: &Syndrome) -> Result<CosetProbabilities> {
    if code.family != CodeFamily::Repetition {
        return Err(Error::UnsupportedFamily {
            op: "repetition_coset_probabilities",
            family: code.family,
        });
    }
    let rep = code.representative(s)?;
    repetition::coset_probabilities(code, noise, &rep)
}

#[cfg(test)]
mod tests;
