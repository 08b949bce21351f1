//! Mapping from coset sums to disordered Ising models.
//!
//! For a parent chain `C`, each check carries an Ising spin; flipping spin `i`
//! applies check `i` to the chain. Writing the single-qubit log-probability as
//! a character expansion over the Klein group gives, per qubit `v` and per
//! Pauli `P`, a term `K_P * chi_P(C_v) * prod s_i` over the checks whose letter
//! at `v` anticommutes with `P`. Terms with an odd number of spins are padded
//! with a fixed `+1` spin standing for the missing boundary check. The energy
//! is shifted so that the all-up state has `H = 0`, hence
//! `exp(-H(s)) = pi(S(s) C) / pi(C)` for every configuration.
//!
//! The 1D transfer-matrix partition functions and the closed-form special-point
//! results live here as well.

use std::collections::HashMap;

use serde::Serialize;

use crate::code::{CodeFamily, CodeSpec};
use crate::error::{Error, Result};
use crate::noise::{Bias, NoiseParams};
use crate::pauli::{PauliLetter, PauliString};

/// Coupling constants at unit inverse temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Couplings {
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
}

impl Couplings {
    pub fn get(&self, kind: PauliLetter) -> f64 {
        match kind {
            PauliLetter::X => self.k_x,
            PauliLetter::Y => self.k_y,
            PauliLetter::Z => self.k_z,
            PauliLetter::I => 0.0,
        }
    }
}

pub fn couplings(noise: &NoiseParams) -> Result<Couplings> {
    let (pi, px, py, pz) = (noise.p_identity(), noise.p_x, noise.p_y, noise.p_z);
    if [pi, px, py, pz].iter().any(|&r| r <= 0.0) {
        return Err(Error::OutOfRange(format!(
            "couplings diverge: rates (1-p, p_x, p_y, p_z) = ({pi}, {px}, {py}, {pz}) must all be positive"
        )));
    }
    Ok(Couplings {
        k_x: -0.25 * (px * pi / (py * pz)).ln(),
        k_y: -0.25 * (py * pi / (px * pz)).ln(),
        k_z: -0.25 * (pz * pi / (px * py)).ln(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    /// One per check.
    Free(usize),
    /// Pinned to `+1`.
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoSpinTerm {
    pub spins: [Spin; 2],
    pub coupling: f64,
    /// Which of `K_x`, `K_y`, `K_z` the term carries.
    pub kind: PauliLetter,
    pub vertex: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FourSpinTerm {
    pub spins: [Spin; 4],
    pub coupling: f64,
    pub kind: PauliLetter,
    pub vertex: usize,
}

/// `H(s) = sum_terms K * prod(s) + constant`.
#[derive(Clone, Debug, Default)]
pub struct IsingModel {
    pub free_spins: usize,
    pub fixed_spins: usize,
    pub two_spin_terms: Vec<TwoSpinTerm>,
    pub four_spin_terms: Vec<FourSpinTerm>,
    pub constant: f64,
}

impl IsingModel {
    #[inline]
    fn value(spin: Spin, config: &[i8]) -> f64 {
        match spin {
            Spin::Free(i) => config[i] as f64,
            Spin::Fixed(_) => 1.0,
        }
    }

    /// Energy of a configuration of the free spins (entries `+1` or `-1`).
    pub fn energy(&self, config: &[i8]) -> f64 {
        assert_eq!(config.len(), self.free_spins);
        let two: f64 = self
            .two_spin_terms
            .iter()
            .map(|t| t.coupling * t.spins.iter().map(|&s| Self::value(s, config)).product::<f64>())
            .sum();
        let four: f64 = self
            .four_spin_terms
            .iter()
            .map(|t| t.coupling * t.spins.iter().map(|&s| Self::value(s, config)).product::<f64>())
            .sum();
        two + four + self.constant
    }

    pub fn all_up(&self) -> Vec<i8> {
        vec![1; self.free_spins]
    }
}

/// Builds the Ising model whose partition function is the coset sum of `parent`,
/// normalized by the parent's own probability.
pub fn build_ising(code: &CodeSpec, parent: &PauliString, noise: &NoiseParams) -> Result<IsingModel> {
    if !code.family.is_surface() {
        return Err(Error::UnsupportedFamily {
            op: "build_ising",
            family: code.family,
        });
    }
    if parent.len() != code.n {
        return Err(Error::LengthMismatch {
            left: parent.len(),
            right: code.n,
        });
    }
    let k = couplings(noise)?;

    let mut at_vertex: Vec<Vec<(usize, PauliLetter)>> = vec![Vec::new(); code.n];
    for i in 0..code.num_checks() {
        for &(v, letter) in code.check_support(i) {
            at_vertex[v].push((i, letter));
        }
    }
    let present: HashMap<(i32, i32), usize> = code.faces.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let mut fixed_ids: HashMap<(i32, i32), usize> = HashMap::new();

    let mut model = IsingModel {
        free_spins: code.num_checks(),
        ..Default::default()
    };
    let mut all_up_energy = 0.0;
    for v in 0..code.n {
        let (row, col) = ((v / code.d) as i32, (v % code.d) as i32);
        let missing = [(row - 1, col - 1), (row - 1, col), (row, col - 1), (row, col)]
            .into_iter()
            .find(|f| !present.contains_key(f))
            .unwrap_or((i32::MIN, i32::MIN));
        for kind in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
            let mut spins: Vec<Spin> = at_vertex[v]
                .iter()
                .filter(|(_, letter)| !letter.commutes(kind))
                .map(|&(i, _)| Spin::Free(i))
                .collect();
            if spins.is_empty() {
                continue;
            }
            if spins.len() % 2 == 1 {
                let next = fixed_ids.len();
                let id = *fixed_ids.entry(missing).or_insert(next);
                spins.push(Spin::Fixed(id));
            }
            let sign = if parent.get(v).commutes(kind) { 1.0 } else { -1.0 };
            let coupling = sign * k.get(kind);
            all_up_energy += coupling;
            match spins.len() {
                2 => model.two_spin_terms.push(TwoSpinTerm {
                    spins: [spins[0], spins[1]],
                    coupling,
                    kind,
                    vertex: v,
                }),
                4 => model.four_spin_terms.push(FourSpinTerm {
                    spins: [spins[0], spins[1], spins[2], spins[3]],
                    coupling,
                    kind,
                    vertex: v,
                }),
                other => unreachable!("a qubit touches at most four checks, got {other} spins"),
            }
        }
    }
    model.fixed_spins = fixed_ids.len();
    model.constant = -all_up_energy;
    Ok(model)
}

pub const BRUTE_FORCE_SPIN_LIMIT: usize = 26;

/// Running `ln(sum exp(x))`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        } else {
            self.sum += (x - self.max).exp();
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `ln sum_s exp(-H(s))` by enumerating every free-spin configuration.
pub fn brute_force_log_partition(model: &IsingModel) -> Result<f64> {
    if model.free_spins > BRUTE_FORCE_SPIN_LIMIT {
        return Err(Error::EnumerationBound {
            what: "free spins",
            count: model.free_spins,
            limit: BRUTE_FORCE_SPIN_LIMIT,
        });
    }
    let mut config = vec![1i8; model.free_spins];
    let mut acc = LogSumExp::new();
    for mask in 0u64..(1u64 << model.free_spins) {
        for (i, s) in config.iter_mut().enumerate() {
            *s = if mask >> i & 1 == 1 { -1 } else { 1 };
        }
        acc.add(-model.energy(&config));
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Both end spins summed.
    Open,
    /// First spin pinned to `+1`.
    OneFixed,
    /// Both end spins pinned to `+1`.
    BothFixed,
    /// Ring of `n` spins.
    Periodic,
}

/// A 1D chain `H = sum_j K_j s_{j-1} s_j` over `n` bonds.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferSpec {
    pub couplings: Vec<f64>,
    pub boundary: Boundary,
}

/// Partition function of a 1D chain as a product of 2x2 transfer matrices,
/// rescaled after each step.
pub fn transfer_log_partition(spec: &TransferSpec) -> Result<f64> {
    if spec.couplings.is_empty() {
        return Err(Error::OutOfRange("a transfer chain needs at least one bond".into()));
    }
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0;
    for &k in &spec.couplings {
        let (same, diff) = ((-k).exp(), k.exp());
        let t = [[same, diff], [diff, same]];
        let mut next = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                next[a][b] = m[a][0] * t[0][b] + m[a][1] * t[1][b];
            }
        }
        let scale = next.iter().flatten().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        for x in next.iter_mut().flatten() {
            *x /= scale;
        }
        log_scale += scale.ln();
        m = next;
    }
    let z = match spec.boundary {
        Boundary::Open => m[0][0] + m[0][1] + m[1][0] + m[1][1],
        Boundary::OneFixed => m[0][0] + m[0][1],
        Boundary::BothFixed => m[0][0],
        Boundary::Periodic => m[0][0] + m[1][1],
    };
    Ok(log_scale + z.ln())
}

fn minority_angle(d_z: usize, eta: Bias) -> Result<f64> {
    if d_z == 0 {
        return Err(Error::OutOfRange("d_z must be at least 1".into()));
    }
    crate::noise::special_point(eta)?;
    Ok(d_z as f64 * eta.minority_ratio().atanh())
}

/// `P_X / P_I = tanh(d_z artanh(1 / 2 eta))` at the special point.
pub fn special_point_class_ratio(d_z: usize, eta: Bias) -> Result<f64> {
    Ok(minority_angle(d_z, eta)?.tanh())
}

/// Logical failure rates under maximum-likelihood decoding at the special point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpecialPointRates {
    #[serde(rename = "P_fX")]
    pub p_fx: f64,
    #[serde(rename = "P_fZ")]
    pub p_fz: f64,
    #[serde(rename = "P_fY")]
    pub p_fy: f64,
    #[serde(rename = "P_f")]
    pub p_f: f64,
}

pub fn special_point_failure_rates(family: CodeFamily, d: usize, eta: Bias) -> Result<SpecialPointRates> {
    if !matches!(family, CodeFamily::Xzzx | CodeFamily::Xy) {
        return Err(Error::UnsupportedFamily {
            op: "special_point_failure_rates",
            family,
        });
    }
    let decay = (-2.0 * minority_angle(family.pure_z_distance(d), eta)?).exp();
    Ok(SpecialPointRates {
        p_fx: 0.5,
        p_fz: 0.5 - 0.5 * decay,
        p_fy: 0.5,
        p_f: 0.75 - 0.25 * decay,
    })
}
