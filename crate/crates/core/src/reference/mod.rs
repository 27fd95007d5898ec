//! Operator-specific leading-digit reference distributions.
//!
//! A reference is the leading-digit pmf of an operator's output when the
//! operator is applied to Benford-conforming synthetic vectors. It is
//! realized by Monte Carlo, then calibrated with a floor `a`: the largest
//! raw anomaly score seen across conforming null samples.

mod bucket;
mod cache;
mod operator;
mod synth;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digit::{leading_digit, Digit, DigitHistogram, DigitPmf};
use crate::error::{Error, Result};
use crate::ks::{ks_discrete, sample_histogram, NullDistribution};
use crate::rng::substream;

pub use bucket::{bucket, BUCKETS};
pub use cache::{load_reference, store_reference, ReferenceCache, CACHE_VERSION};
pub use operator::{apply_operator, mean, ols_slope, sample_std, Operand, OperatorKind};
pub use synth::{
    synth_benford_vector, synth_vector_at, SynthesisConfig, DEFAULT_CENTER_RANGE,
    DEFAULT_DECADE_SPAN, DEFAULT_MC_DRAWS, MIN_MC_DRAWS,
};

/// Fraction of degenerate draws above which generation is aborted.
pub const MAX_SKIP_FRACTION: f64 = 0.10;

/// Number of conforming null samples used to place the calibration floor.
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 1000;

/// Resamples behind the KS null used for calibration and pipeline scoring.
///
/// The floor sits near the 1/1000 tail of the null, so the p-value
/// resolution has to be well below that for normalized scores to use the
/// whole `[0, 1]` range.
pub const DEFAULT_NULL_RESAMPLES: usize = 100_000;

/// Cache key: operator, vector-length bucket, observed-length bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReferenceKey {
    pub operator: OperatorKind,
    pub entries_per_vector: usize,
    pub observed_len_bucket: usize,
}

impl ReferenceKey {
    /// Buckets raw lengths.
    pub fn new(operator: OperatorKind, entries_per_vector: usize, observed_len: usize) -> Self {
        ReferenceKey {
            operator,
            entries_per_vector: bucket(entries_per_vector),
            observed_len_bucket: bucket(observed_len),
        }
    }
}

impl fmt::Display for ReferenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/n={}/obs={}",
            self.operator, self.entries_per_vector, self.observed_len_bucket
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDistribution {
    pub operator: OperatorKind,
    pub entries_per_vector: usize,
    /// Set once calibrated.
    pub observed_len_bucket: Option<usize>,
    pub pmf: DigitPmf,
    /// `a` in `[0, 1)`; `None` until calibrated.
    pub calibration_floor: Option<f64>,
    pub mc_draws: usize,
    pub calibration_samples: usize,
    pub seed: u64,
    /// Draws whose operator output had no leading digit.
    #[serde(default)]
    pub skipped_draws: usize,
}

impl ReferenceDistribution {
    pub fn key(&self) -> Result<ReferenceKey> {
        let observed_len_bucket = self
            .observed_len_bucket
            .ok_or_else(|| Error::UncalibratedReference(self.label()))?;
        Ok(ReferenceKey {
            operator: self.operator,
            entries_per_vector: self.entries_per_vector,
            observed_len_bucket,
        })
    }

    pub fn floor(&self) -> Result<f64> {
        self.calibration_floor
            .ok_or_else(|| Error::UncalibratedReference(self.label()))
    }

    fn label(&self) -> String {
        format!("{}/n={}", self.operator, self.entries_per_vector)
    }
}

/// Leading digit of the operator applied to one synthetic draw.
fn draw_digit(op: OperatorKind, cfg: &SynthesisConfig, index: u64) -> Option<Digit> {
    let mut rng = substream(cfg.seed, index);
    let value = match op {
        OperatorKind::Mean | OperatorKind::StdDev => {
            let v = synth_benford_vector(cfg, &mut rng);
            apply_operator(op, Operand::Single(&v))
        }
        OperatorKind::OlsSlope => {
            let x = synth_benford_vector(cfg, &mut rng);
            let y = synth_benford_vector(cfg, &mut rng);
            apply_operator(op, Operand::Paired { x: &x, y: &y })
        }
    };
    value.and_then(leading_digit::<f64>).ok()
}

/// Monte-Carlo leading-digit pmf of `op` over `cfg.mc_draws` synthetic draws.
///
/// Draw `i` always uses substream `i` of `cfg.seed`, so the result does not
/// depend on how the draws are scheduled across threads.
pub fn generate_reference(
    op: OperatorKind,
    cfg: &SynthesisConfig,
) -> Result<ReferenceDistribution> {
    cfg.validate()?;
    let (hist, skipped) = (0..cfg.mc_draws as u64)
        .into_par_iter()
        .fold(
            || (DigitHistogram::default(), 0usize),
            |(mut h, mut skipped), i| {
                match draw_digit(op, cfg, i) {
                    Some(d) => h.record(d),
                    None => skipped += 1,
                }
                (h, skipped)
            },
        )
        .reduce(
            || (DigitHistogram::default(), 0usize),
            |(mut a, sa), (b, sb)| {
                a.merge(&b);
                (a, sa + sb)
            },
        );

    if skipped as f64 > MAX_SKIP_FRACTION * cfg.mc_draws as f64 {
        return Err(Error::TooManySkips {
            skipped,
            draws: cfg.mc_draws,
        });
    }
    Ok(ReferenceDistribution {
        operator: op,
        entries_per_vector: cfg.entries_per_vector,
        observed_len_bucket: None,
        pmf: hist.frequencies()?,
        calibration_floor: None,
        mc_draws: cfg.mc_draws,
        calibration_samples: 0,
        seed: cfg.seed,
        skipped_draws: skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub null_samples: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl CalibrationConfig {
    pub fn new(seed: u64) -> Self {
        CalibrationConfig {
            null_samples: DEFAULT_CALIBRATION_SAMPLES,
            resamples: DEFAULT_NULL_RESAMPLES,
            seed,
        }
    }
}

/// Places the calibration floor for observation sets of `observed_len` digits.
///
/// Draws `null_samples` conforming histograms from the reference pmf and
/// scores each against one simulated KS null of the same size; the floor is
/// the largest raw score `1 - p` among them.
pub fn calibrate_floor(
    reference: &ReferenceDistribution,
    observed_len: usize,
    cfg: &CalibrationConfig,
) -> Result<ReferenceDistribution> {
    if observed_len == 0 {
        return Err(Error::EmptyHistogram);
    }
    if cfg.null_samples == 0 {
        return Err(Error::InvalidConfig("null_samples must be positive".into()));
    }
    let total = observed_len as u64;
    let null = NullDistribution::simulate(
        &reference.pmf,
        total,
        cfg.resamples,
        &mut substream(cfg.seed, 0),
    )?;
    let mut rng = substream(cfg.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.null_samples {
        let h = sample_histogram(&reference.pmf, total, &mut rng);
        let raw = 1.0 - null.p_value(ks_discrete(&h, &reference.pmf)?);
        worst = worst.max(raw);
    }
    Ok(ReferenceDistribution {
        observed_len_bucket: Some(bucket(observed_len)),
        calibration_floor: Some(worst),
        calibration_samples: cfg.null_samples,
        ..reference.clone()
    })
}
