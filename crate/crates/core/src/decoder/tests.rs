use super::*;
use crate::code::build_code;
use crate::pauli::PauliLetter;
use crate::noise::{biased_rates, chain_log_prob, sample_chain, special_point};
use crate::statmech::{special_point_class_ratio, LogSumExp};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn probs(normalized: [f64; 4]) -> CosetProbabilities {
    CosetProbabilities {
        log_p: normalized.map(f64::ln),
        normalized,
    }
}

fn random_syndrome(code: &CodeSpec, rng: &mut ChaCha8Rng) -> Syndrome {
    Syndrome::new((0..code.num_checks()).map(|_| rng.random_bool(0.5)).collect())
}

/// Sums every chain of the full Pauli group with the given syndrome, bucketed by class.
fn full_group_oracle(code: &CodeSpec, noise: &NoiseParams, s: &Syndrome) -> [f64; 4] {
    let mut acc = [LogSumExp::new(); 4];
    let letters = [PauliLetter::I, PauliLetter::X, PauliLetter::Y, PauliLetter::Z];
    for mut idx in 0..4usize.pow(code.n as u32) {
        let mut chain = PauliString::identity(code.n);
        for v in 0..code.n {
            chain.set(v, letters[idx % 4]);
            idx /= 4;
        }
        if &code.syndrome(&chain).unwrap() == s {
            acc[code.equivalence_class(&chain).unwrap().index()].add(chain_log_prob(noise, &chain));
        }
    }
    acc.map(|a| a.value())
}


#[test]
fn decode_class_examples() {
    assert_eq!(decode_class(&probs([0.7, 0.1, 0.1, 0.1])), EquivClass::I);
    assert_eq!(decode_class(&probs([0.46, 0.04, 0.46, 0.04])), EquivClass::I);
    assert_eq!(decode_class(&probs([0.1, 0.7, 0.1, 0.1])), EquivClass::X);
    assert_eq!(decode_class(&probs([0.1, 0.4, 0.1, 0.4])), EquivClass::X);
    assert_eq!(decode_class(&probs([0.1, 0.1, 0.4, 0.4])), EquivClass::Z);
    assert_eq!(decode_class(&probs([0.1, 0.1, 0.1, 0.7])), EquivClass::Y);
}

#[test]
fn exact_matches_full_group_at_d3() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for family in [CodeFamily::Xzzx, CodeFamily::Xy, CodeFamily::Xz] {
        let code = build_code(family, 3).unwrap();
        let noise = biased_rates(rng.random_range(0.05..0.4), Bias::Finite(rng.random_range(0.5..10.0))).unwrap();
        for _ in 0..2 {
            let s = random_syndrome(&code, &mut rng);
            let got = coset_probabilities_exact(&code, &noise, &s).unwrap();
            let want = full_group_oracle(&code, &noise, &s);
            for k in 0..4 {
                assert!((got.log_p[k] - want[k]).abs() < 1e-10, "{family}: {:?} vs {want:?}", got.log_p);
            }
        }
    }
}

#[test]
fn exact_examples() {
    let code = build_code(CodeFamily::Xzzx, 3).unwrap();
    let noise = biased_rates(1e-6, Bias::Finite(1.0)).unwrap();
    let c = coset_probabilities_exact(&code, &noise, &Syndrome::zeros(8)).unwrap();
    assert!(c.get(EquivClass::I) > 1.0 - 1e-4);
    assert!((c.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for eta in [1.0, 3.0, 30.0] {
        let b = Bias::Finite(eta);
        let noise = biased_rates(special_point(b).unwrap(), b).unwrap();
        let t = special_point_class_ratio(3, b).unwrap();
        for _ in 0..10 {
            let c = coset_probabilities_exact(&code, &noise, &random_syndrome(&code, &mut rng)).unwrap();
            let [pi, px, pz, py] = c.normalized;
            assert!((pi - pz).abs() < 1e-9 && (px - py).abs() < 1e-9, "{c:?}");
            assert!((pi / px - 1.0 / t).abs() < 1e-9 * (1.0 / t));
        }
    }

    let xy = build_code(CodeFamily::Xy, 3).unwrap();
    let b = Bias::Finite(30.0);
    let noise = biased_rates(special_point(b).unwrap(), b).unwrap();
    let t = (9.0 * (1.0f64 / 60.0).atanh()).tanh();
    let c = coset_probabilities_exact(&xy, &noise, &random_syndrome(&xy, &mut rng)).unwrap();
    assert!((c.get(EquivClass::I) - 1.0 / (2.0 * (1.0 + t))).abs() < 1e-9, "{c:?}");
}

#[test]
fn mps_matches_exact_at_d3() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = biased_rates(0.3, Bias::Finite(10.0)).unwrap();
    for family in [CodeFamily::Xzzx, CodeFamily::Xy, CodeFamily::Xz] {
        let code = build_code(family, 3).unwrap();
        for axis in [SweepAxis::Rows, SweepAxis::Columns] {
            let cfg = DecoderConfig {
                axis,
                ..DecoderConfig::with_chi(8)
            };
            for _ in 0..40 {
                let s = random_syndrome(&code, &mut rng);
                let a = coset_probabilities_exact(&code, &noise, &s).unwrap();
                let b = coset_probabilities_mps(&code, &noise, &s, &cfg).unwrap();
                for k in 0..4 {
                    assert!((a.normalized[k] - b.normalized[k]).abs() < 1e-10, "{family} {axis:?}: {a:?} {b:?}");
                    assert!((a.log_p[k] - b.log_p[k]).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn mps_exact_regime_is_chi_independent_at_d5() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let code = build_code(CodeFamily::Xzzx, 5).unwrap();
    let noise = biased_rates(0.2, Bias::Finite(3.0)).unwrap();
    for _ in 0..5 {
        let s = random_syndrome(&code, &mut rng);
        let a = coset_probabilities_mps(&code, &noise, &s, &DecoderConfig::with_chi(8)).unwrap();
        let b = coset_probabilities_mps(
            &code,
            &noise,
            &s,
            &DecoderConfig {
                chi: 64,
                svd_cutoff: 0.0,
                axis: SweepAxis::Columns,
            },
        )
        .unwrap();
        for k in 0..4 {
            assert!((a.normalized[k] - b.normalized[k]).abs() < 1e-10);
        }
    }
}

#[test]
fn mps_special_point_symmetry_at_d5() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let code = build_code(CodeFamily::Xzzx, 5).unwrap();
    let b = Bias::Finite(30.0);
    let noise = biased_rates(special_point(b).unwrap(), b).unwrap();
    let t = special_point_class_ratio(5, b).unwrap();
    for _ in 0..10 {
        let s = random_syndrome(&code, &mut rng);
        let c = coset_probabilities_mps(&code, &noise, &s, &DecoderConfig::with_chi(16)).unwrap();
        let [pi, px, pz, py] = c.normalized;
        assert!((pi - pz).abs() < 1e-6 && (px - py).abs() < 1e-6);
        assert!((px / pi - t).abs() < 1e-6);
    }
}

#[test]
fn low_chi_still_normalizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let code = build_code(CodeFamily::Xzzx, 3).unwrap();
    let noise = biased_rates(0.3, Bias::Finite(1.0)).unwrap();
    let c = coset_probabilities_mps(&code, &noise, &random_syndrome(&code, &mut rng), &DecoderConfig::with_chi(1)).unwrap();
    assert!((c.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(c.normalized.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn representative_gauge_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let noise = biased_rates(0.25, Bias::Finite(2.0)).unwrap();
    let decoders = [Decoder::Exact, Decoder::Mps(DecoderConfig::with_chi(8))];
    for family in [CodeFamily::Xzzx, CodeFamily::Xy, CodeFamily::Xz] {
        let code = build_code(family, 3).unwrap();
        for _ in 0..5 {
            let chain = sample_chain(&noise, code.n, &mut rng);
            let mut moved = chain.clone();
            for check in &code.checks {
                if rng.random_bool(0.5) {
                    moved.mul_assign_unchecked(check);
                }
            }
            for dec in decoders {
                let a = dec.coset_probabilities_for_chain(&code, &noise, &chain).unwrap();
                let b = dec.coset_probabilities_for_chain(&code, &noise, &moved).unwrap();
                for k in 0..4 {
                    assert!((a.normalized[k] - b.normalized[k]).abs() < 1e-9);
                }
            }
        }
    }
}

/// Direct sum over the `2^(d-1)` gauge configurations of the repetition code.
fn repetition_oracle(code: &CodeSpec, noise: &NoiseParams, rep: &PauliString) -> [f64; 4] {
    class_chains(code, rep).map(|c| {
        let mut acc = LogSumExp::new();
        for mask in 0u32..(1 << code.num_checks()) {
            let mut chain = c.clone();
            for (i, check) in code.checks.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    chain.mul_assign_unchecked(check);
                }
            }
            acc.add(chain_log_prob(noise, &chain));
        }
        acc.value()
    })
}

#[test]
fn repetition_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for d in [1, 3, 5, 7, 9, 11] {
        let code = build_code(CodeFamily::Repetition, d).unwrap();
        for _ in 0..5 {
            let noise = biased_rates(rng.random_range(0.01..0.6), Bias::Finite(rng.random_range(0.5..100.0))).unwrap();
            let s = random_syndrome(&code, &mut rng);
            let got = repetition_coset_probabilities(&code, &noise, &s).unwrap();
            let want = repetition_oracle(&code, &noise, &code.representative(&s).unwrap());
            for k in 0..4 {
                assert!((got.log_p[k] - want[k]).abs() < 1e-10, "d={d}");
            }
            assert_eq!(coset_probabilities_exact(&code, &noise, &s).unwrap(), got);
        }
    }
    let code = build_code(CodeFamily::Repetition, 3).unwrap();
    let noise = biased_rates(1e-6, Bias::Finite(1.0)).unwrap();
    assert!(repetition_coset_probabilities(&code, &noise, &Syndrome::zeros(2)).unwrap().get(EquivClass::I) > 1.0 - 1e-4);
}

#[test]
fn repetition_symmetric_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let noise = biased_rates(0.5, Bias::Infinite).unwrap();
    for d in [3, 5, 7] {
        let code = build_code(CodeFamily::Repetition, d).unwrap();
        for _ in 0..5 {
            let c = repetition_coset_probabilities(&code, &noise, &random_syndrome(&code, &mut rng)).unwrap();
            assert!((c.get(EquivClass::I) - 0.5).abs() < 1e-12 && (c.get(EquivClass::Z) - 0.5).abs() < 1e-12, "{c:?}");
        }
    }
}

#[test]
fn error_paths() {
    let noise = biased_rates(0.1, Bias::Finite(1.0)).unwrap();
    let rep = build_code(CodeFamily::Repetition, 3).unwrap();
    assert!(coset_probabilities_mps(&rep, &noise, &Syndrome::zeros(2), &DecoderConfig::with_chi(4)).is_err());
    let big = build_code(CodeFamily::Xzzx, 7).unwrap();
    assert!(matches!(
        coset_probabilities_exact(&big, &noise, &Syndrome::zeros(big.num_checks())),
        Err(Error::EnumerationBound { .. })
    ));
    let xzzx = build_code(CodeFamily::Xzzx, 3).unwrap();
    assert!(repetition_coset_probabilities(&xzzx, &noise, &Syndrome::zeros(8)).is_err());
    assert!(coset_probabilities_exact(&xzzx, &noise, &Syndrome::zeros(7)).is_err());
    assert!(DecoderConfig::with_chi(0).validate().is_err());
    let bad = DecoderConfig {
        svd_cutoff: 1.0,
        ..DecoderConfig::with_chi(4)
    };
    assert!(coset_probabilities_mps(&xzzx, &noise, &Syndrome::zeros(8), &bad).is_err());
    assert!(CosetProbabilities::from_log_weights([f64::NEG_INFINITY; 4]).is_err());
    assert!(!Decoder::Mps(DecoderConfig::with_chi(4)).supports(CodeFamily::Repetition));
}

#[test]
fn default_config_follows_bias() {
    assert_eq!(DecoderConfig::for_bias(Bias::Finite(3.0)).chi, 16);
    assert_eq!(DecoderConfig::for_bias(Bias::Finite(30.0)).chi, 8);
    assert_eq!(DecoderConfig::for_bias(Bias::Infinite).chi, 8);
    assert_eq!(DecoderConfig::for_bias(Bias::Finite(3.0)).svd_cutoff, 1e-16);
}

proptest! {
    #[test]
    fn decode_class_ignores_uniform_log_shift(
        w in prop::array::uniform4(-30.0f64..0.0),
        shift in -500.0f64..500.0,
    ) {
        let a = CosetProbabilities::from_log_weights(w).unwrap();
        let b = CosetProbabilities::from_log_weights(w.map(|x| x + shift)).unwrap();
        prop_assert_eq!(decode_class(&a), decode_class(&b));
        prop_assert!((a.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
