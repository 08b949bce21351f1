use crate::code::CodeSpec;
use crate::error::Result;
use crate::noise::NoiseParams;
use crate::pauli::{PauliLetter, PauliString};

use super::{class_chains, CosetProbabilities};

/// Qubit `i` sits between gauge spins `a_{i-1}` and `a_i` (checks `X_{i-1} X_i`, `X_i X_{i+1}`);
/// the outer spins are pinned, so the group sum is a product of 2x2 transfer matrices.
fn log_coset(noise: &NoiseParams, chain: &PauliString) -> f64 {
    let mut v = [1.0, 0.0];
    let mut log_scale = 0.0;
    for i in 0..chain.len() {
        let c = chain.get(i);
        let same = noise.letter_prob(c);
        let flip = noise.letter_prob(c.mul(PauliLetter::X));
        let is_last = i + 1 == chain.len();
        let next = if is_last {
            [v[0] * same + v[1] * flip, 0.0]
        } else {
            [v[0] * same + v[1] * flip, v[0] * flip + v[1] * same]
        };
        let scale = next[0].max(next[1]);
        if scale == 0.0 {
            return f64::NEG_INFINITY;
        }
        v = [next[0] / scale, next[1] / scale];
        log_scale += scale.ln();
    }
    log_scale + v[0].ln()
}

pub(super) fn coset_probabilities(code: &CodeSpec, noise: &NoiseParams, rep: &PauliString) -> Result<CosetProbabilities> {
    let chains = class_chains(code, rep);
    CosetProbabilities::from_log_weights(chains.each_ref().map(|c| log_coset(noise, c)))
}
