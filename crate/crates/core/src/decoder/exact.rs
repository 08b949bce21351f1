use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::noise::{log_prob_from_counts, NoiseParams};
use crate::pauli::PauliString;
use crate::statmech::LogSumExp;

use super::{class_chains, CosetProbabilities};

/// Largest number of checks the enumeration accepts (`2^24` group elements per class).
pub const EXACT_CHECK_LIMIT: usize = 24;

fn masks(p: &PauliString) -> (u32, u32) {
    (p.x_words()[0] as u32, p.z_words()[0] as u32)
}

/// Walks the stabilizer group in Gray-code order, histogramming `(n_x, n_y, n_z)`
/// per coset; weights are applied once per histogram bin.
pub(super) fn coset_probabilities(code: &CodeSpec, noise: &NoiseParams, rep: &PauliString) -> Result<CosetProbabilities> {
    let m = code.num_checks();
    if m > EXACT_CHECK_LIMIT {
        return Err(Error::EnumerationBound {
            what: "checks",
            count: m,
            limit: EXACT_CHECK_LIMIT,
        });
    }
    debug_assert!(code.n <= 32);
    let n = code.n;
    let checks: Vec<(u32, u32)> = code.checks.iter().map(masks).collect();
    let mut chains = class_chains(code, rep).map(|c| masks(&c));

    let side = n + 1;
    let mut hist = vec![vec![0u32; side * side * side]; 4];
    let mut record = |chains: &[(u32, u32); 4]| {
        for (h, &(x, z)) in hist.iter_mut().zip(chains.iter()) {
            let ny = (x & z).count_ones() as usize;
            let nx = (x & !z).count_ones() as usize;
            let nz = (z & !x).count_ones() as usize;
            h[(nx * side + ny) * side + nz] += 1;
        }
    };
    record(&chains);
    for step in 1u64..(1u64 << m) {
        let (cx, cz) = checks[step.trailing_zeros() as usize];
        for c in chains.iter_mut() {
            c.0 ^= cx;
            c.1 ^= cz;
        }
        record(&chains);
    }

    let mut log_p = [f64::NEG_INFINITY; 4];
    for (k, h) in hist.iter().enumerate() {
        let mut acc = LogSumExp::new();
        for nx in 0..side {
            for ny in 0..side - nx {
                for nz in 0..side - nx - ny {
                    let count = h[(nx * side + ny) * side + nz];
                    if count > 0 {
                        acc.add((count as f64).ln() + log_prob_from_counts(noise, n - nx - ny - nz, nx, ny, nz));
                    }
                }
            }
        }
        log_p[k] = acc.value();
    }
    CosetProbabilities::from_log_weights(log_p)
}
