//! Leading-digit forensics for reported statistics.
//!
//! Statistics computed from Benford-conforming data carry an operator
//! specific leading-digit law. This crate builds those laws by simulation,
//! calibrates a discrete Kolmogorov-Smirnov test against them, and turns
//! per-operator p-values into a single anomaly score in `[0, 1]`.
//!
//! ```
//! use digit_forensics::{leading_digit, benford_pmf};
//!
//! assert_eq!(leading_digit(0.0314_f64).unwrap().value(), 3);
//! assert!((benford_pmf().probs()[0] - 2f64.log10()).abs() < 1e-15);
//! ```

pub mod digit;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod ks;
pub mod pipeline;
pub mod reference;
pub mod rng;
pub mod scalar;
pub mod scoring;

pub use digit::{benford_pmf, histogram, leading_digit, Digit, DigitHistogram, DigitPmf, DIGITS};
pub use error::{Error, Result};
pub use ks::{ks_discrete, ks_p_value, KsResult, NullDistribution};
pub use pipeline::{Scorer, ScorerConfig, DEFAULT_SEED};
pub use reference::{
    calibrate_floor, generate_reference, CalibrationConfig, OperatorKind, ReferenceCache,
    ReferenceDistribution, ReferenceKey, SynthesisConfig,
};
pub use scalar::Scalar;
pub use scoring::{
    aggregate, flag, normalize, score_operator, AggregateOutcome, OperatorScore, TestOutcome,
};

pub type DatasetMatrix64 = ingest::DatasetMatrix<f64>;
pub type DatasetMatrix32 = ingest::DatasetMatrix<f32>;
pub type ComputedStats64 = ingest::ComputedStats<f64>;
pub type ComputedStats32 = ingest::ComputedStats<f32>;
