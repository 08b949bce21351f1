//! Biased single-qubit Pauli noise.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliString};

/// Phase bias `eta = p_z / (2 p_x)`, with pure dephasing as its own value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bias {
    Finite(f64),
    Infinite,
}

impl Bias {
    pub const DEPOLARIZING: Bias = Bias::Finite(0.5);

    fn validate(self) -> Result<Self> {
        match self {
            Bias::Finite(eta) if !(eta >= 0.5) || !eta.is_finite() => {
                Err(Error::OutOfRange(format!("bias eta = {eta} must be >= 1/2")))
            }
            b => Ok(b),
        }
    }

    /// `1 / (2 eta)`, zero for pure dephasing.
    pub fn minority_ratio(self) -> f64 {
        match self {
            Bias::Finite(eta) => 1.0 / (2.0 * eta),
            Bias::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Bias::Infinite)
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Bias::Finite(eta) => eta,
            Bias::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bias::Finite(eta) => write!(f, "{eta}"),
            Bias::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Bias {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Bias::Infinite),
            other => {
                let eta: f64 = other.parse().map_err(|_| Error::Parse(format!("invalid bias {s:?}")))?;
                if eta.is_infinite() {
                    Ok(Bias::Infinite)
                } else {
                    Bias::Finite(eta).validate()
                }
            }
        }
    }
}

impl Serialize for Bias {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bias::Finite(eta) => serializer.serialize_f64(*eta),
            Bias::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bias {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(eta) => Bias::Finite(eta).validate().map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Single-qubit Pauli error rates.
///
/// Built either from a total rate and a bias ([`biased_rates`]) or from three
/// explicit rates ([`NoiseParams::from_rates`], [`xz_decoupled_rates`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub p: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl NoiseParams {
    pub fn from_rates(p_x: f64, p_y: f64, p_z: f64) -> Result<Self> {
        let p = p_x + p_y + p_z;
        if [p_x, p_y, p_z].iter().any(|r| !(0.0..1.0).contains(r)) || !(0.0..1.0).contains(&p) {
            return Err(Error::OutOfRange(format!(
                "rates ({p_x}, {p_y}, {p_z}) must be non-negative with sum < 1"
            )));
        }
        Ok(Self { p, p_x, p_y, p_z })
    }

    pub fn p_identity(&self) -> f64 {
        1.0 - self.p
    }

    /// Probability of a single-site letter.
    pub fn letter_prob(&self, letter: PauliLetter) -> f64 {
        match letter {
            PauliLetter::I => 1.0 - self.p,
            PauliLetter::X => self.p_x,
            PauliLetter::Y => self.p_y,
            PauliLetter::Z => self.p_z,
        }
    }

    /// Bias recovered from the rates, when `p_x = p_y`.
    pub fn bias(&self) -> Option<Bias> {
        if (self.p_x - self.p_y).abs() > 1e-15 {
            return None;
        }
        if self.p_x == 0.0 {
            return Some(Bias::Infinite);
        }
        Some(Bias::Finite(self.p_z / (2.0 * self.p_x)))
    }
}

pub fn biased_rates(p: f64, eta: Bias) -> Result<NoiseParams> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("total error rate p = {p} must lie in [0, 1)")));
    }
    let eta = eta.validate()?;
    Ok(match eta {
        Bias::Infinite => NoiseParams {
            p,
            p_x: 0.0,
            p_y: 0.0,
            p_z: p,
        },
        Bias::Finite(eta) => {
            let minority = p / (2.0 * (eta + 1.0));
            NoiseParams {
                p,
                p_x: minority,
                p_y: minority,
                p_z: p * eta / (eta + 1.0),
            }
        }
    })
}

/// The error rate at which `p_z = 1 - p`: `(1 + 1/eta) / (2 + 1/eta)`.
pub fn special_point(eta: Bias) -> Result<f64> {
    Ok(match eta.validate()? {
        Bias::Infinite => 0.5,
        Bias::Finite(eta) => {
            let inv = 1.0 / eta;
            (1.0 + inv) / (2.0 + inv)
        }
    })
}

/// Natural-log probability of a chain under iid Pauli noise.
pub fn chain_log_prob(noise: &NoiseParams, chain: &PauliString) -> f64 {
    let w = chain.weight_counts();
    let n_i = chain.len() - w.total();
    log_prob_from_counts(noise, n_i, w.n_x, w.n_y, w.n_z)
}

pub(crate) fn log_prob_from_counts(noise: &NoiseParams, n_i: usize, n_x: usize, n_y: usize, n_z: usize) -> f64 {
    let term = |count: usize, prob: f64| {
        if count == 0 {
            0.0
        } else {
            count as f64 * prob.ln()
        }
    };
    term(n_i, 1.0 - noise.p) + term(n_x, noise.p_x) + term(n_y, noise.p_y) + term(n_z, noise.p_z)
}

/// Draws one letter per site from `(1-p, p_x, p_y, p_z)`.
pub fn sample_chain<R: Rng + ?Sized>(noise: &NoiseParams, n: usize, rng: &mut R) -> PauliString {
    let mut chain = PauliString::identity(n);
    let (cx, cy) = (noise.p_x, noise.p_x + noise.p_y);
    for v in 0..n {
        let u: f64 = rng.random();
        if u < noise.p {
            let letter = if u < cx {
                PauliLetter::X
            } else if u < cy {
                PauliLetter::Y
            } else {
                PauliLetter::Z
            };
            chain.set(v, letter);
        }
    }
    chain
}

/// Shannon entropy of the single-qubit channel, in bits.
pub fn entropy(noise: &NoiseParams) -> f64 {
    [noise.p_identity(), noise.p_x, noise.p_y, noise.p_z]
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum()
}

/// Error rate at which the channel entropy reaches one bit.
///
/// `H` is strictly increasing on `(0, p_s]`, where `p_s` is the special point,
/// so a bisection on that bracket finds the unique root.
pub fn hashing_bound(eta: Bias) -> Result<f64> {
    let eta = eta.validate()?;
    if eta.is_infinite() {
        return Ok(0.5);
    }
    let h = |p: f64| entropy(&biased_rates(p, eta).expect("bracket lies in [0,1)")) - 1.0;
    let (mut lo, mut hi) = (0.0, special_point(eta)?);
    if h(hi) <= 0.0 {
        return Ok(hi);
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rates of independent X-type and Z-type flips with probabilities `p1`, `p2`.
pub fn xz_decoupled_rates(p1: f64, p2: f64) -> Result<NoiseParams> {
    if !(0.0..1.0).contains(&p1) || !(0.0..1.0).contains(&p2) {
        return Err(Error::OutOfRange(format!("p1 = {p1}, p2 = {p2} must lie in [0, 1)")));
    }
    let (p_x, p_y, p_z) = (p1 * (1.0 - p2), p1 * p2, p2 * (1.0 - p1));
    Ok(NoiseParams {
        p: p_x + p_y + p_z,
        p_x,
        p_y,
        p_z,
    })
}
