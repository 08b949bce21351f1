//! Maximum-likelihood decoding of surface codes under biased Pauli noise.
//!
//! The crate builds rotated XZZX, XY and CSS surface codes and the repetition
//! code, samples biased i.i.d. noise, computes logical coset probabilities
//! exactly or with a boundary-MPS contraction, and estimates thresholds by
//! finite-size scaling.
//!
//! ```
//! use biasqec::{build_code, CodeFamily};
//!
//! let code = build_code(CodeFamily::Xzzx, 3).unwrap();
//! assert_eq!((code.n, code.num_checks()), (9, 8));
//! assert!(biasqec::validate_code(&code).all_passed());
//! ```

pub mod code;
pub mod decoder;
pub mod error;
pub mod experiment;
pub mod fit;
pub mod noise;
pub mod pauli;
pub mod statmech;

pub use code::{build_code, validate_code, CodeFamily, CodeSpec, EquivClass, Syndrome, ValidationReport};
pub use decoder::{
    coset_probabilities_exact, coset_probabilities_mps, decode_class, repetition_coset_probabilities,
    CosetProbabilities, Decoder, DecoderConfig, SweepAxis,
};
pub use error::{Error, Result};
pub use experiment::{
    p_grid, run_point, sweep, to_logical_channel, DataRow, Dataset, FailureMode, FailureRates, LogicalChannel, RunConfig,
    CSV_HEADER,
};
pub use fit::{binned_thresholds, fit_threshold, fit_threshold_bootstrap, BinnedFit, FitInput, FitOptions, FitPoint, FitResult};
pub use noise::{biased_rates, hashing_bound, sample_chain, special_point, Bias, NoiseParams};
pub use pauli::{PauliLetter, PauliString, WeightCounts};
pub use statmech::{
    brute_force_log_partition, build_ising, couplings, special_point_class_ratio, special_point_failure_rates,
    transfer_log_partition, Boundary, Couplings, IsingModel, TransferSpec,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/codes.md")]
    mod codes {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/statmech.md")]
    mod statmech {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/thresholds.md")]
    mod thresholds {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
