//! Per-operator anomaly scores and their aggregation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::digit::histogram;
use crate::error::{Error, Result};
use crate::ks::{ks_discrete, KsResult, NullDistribution};
use crate::reference::{OperatorKind, ReferenceDistribution, ReferenceKey};
use crate::scalar::Scalar;

/// Fewest usable leading digits an operator test will run on.
pub const DEFAULT_MIN_SAMPLES: usize = 5;

/// `clip((raw - a) / (1 - a), 0, 1)`.
pub fn normalize(raw: f64, floor: f64) -> f64 {
    if raw <= floor {
        return 0.0;
    }
    ((raw - floor) / (1.0 - floor)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub operator: OperatorKind,
    /// `1 - p`.
    pub raw_score: f64,
    pub normalized_score: f64,
    pub sample_count: usize,
    pub skipped: usize,
    pub reference_key: ReferenceKey,
    pub calibration_floor: f64,
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsufficientData {
    pub operator: OperatorKind,
    pub sample_count: usize,
    pub skipped: usize,
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OperatorScore {
    Scored(TestOutcome),
    InsufficientData(InsufficientData),
}

impl OperatorScore {
    pub fn operator(&self) -> OperatorKind {
        match self {
            OperatorScore::Scored(t) => t.operator,
            OperatorScore::InsufficientData(i) => i.operator,
        }
    }
}

/// Scores `values` against a calibrated reference with a prepared KS null.
///
/// `null` must have been simulated from `reference.pmf` for exactly the
/// number of usable digits in `values`; [`score_operator`] builds one.
pub fn score_with_null<T: Scalar>(
    values: &[T],
    reference: &ReferenceDistribution,
    null: &NullDistribution,
) -> Result<TestOutcome> {
    let floor = reference.floor()?;
    let key = reference.key()?;
    let (hist, skipped) = histogram(values);
    if hist.total() != null.total() {
        return Err(Error::Precondition(format!(
            "null simulated for {} digits, sample has {}",
            null.total(),
            hist.total()
        )));
    }
    let statistic = ks_discrete(&hist, &reference.pmf)?;
    let p_value = null.p_value(statistic);
    let raw = 1.0 - p_value;
    Ok(TestOutcome {
        operator: reference.operator,
        raw_score: raw,
        normalized_score: normalize(raw, floor),
        sample_count: hist.total() as usize,
        skipped,
        reference_key: key,
        calibration_floor: floor,
        ks: KsResult {
            statistic,
            p_value,
            resamples: null.resamples(),
        },
    })
}

/// Runs the irregularity test for one operator's values.
pub fn score_operator<T: Scalar, R: Rng + ?Sized>(
    values: &[T],
    reference: &ReferenceDistribution,
    min_samples: usize,
    resamples: usize,
    rng: &mut R,
) -> Result<OperatorScore> {
    reference.floor()?;
    let (hist, skipped) = histogram(values);
    let usable = hist.total() as usize;
    if usable < min_samples.max(1) {
        return Ok(OperatorScore::InsufficientData(InsufficientData {
            operator: reference.operator,
            sample_count: usable,
            skipped,
            required: min_samples,
        }));
    }
    let null = NullDistribution::simulate(&reference.pmf, hist.total(), resamples, rng)?;
    score_with_null(values, reference, &null).map(OperatorScore::Scored)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateOutcome {
    pub per_operator: Vec<TestOutcome>,
    pub excluded: Vec<InsufficientData>,
    /// Mean of the per-operator normalized scores.
    pub overall: f64,
}

pub fn aggregate(outcomes: Vec<OperatorScore>) -> Result<AggregateOutcome> {
    let mut per_operator = Vec::new();
    let mut excluded = Vec::new();
    for o in outcomes {
        match o {
            OperatorScore::Scored(t) => per_operator.push(t),
            OperatorScore::InsufficientData(i) => excluded.push(i),
        }
    }
    if per_operator.is_empty() {
        let detail = if excluded.is_empty() {
            "no operator groups".to_string()
        } else {
            excluded
                .iter()
                .map(|i| {
                    format!(
                        "{} has {} usable of {} required",
                        i.operator, i.sample_count, i.required
                    )
                })
                .collect::<Vec<_>>()
                .join("; ")
        };
        return Err(Error::NoUsableOutcomes(detail));
    }
    let overall =
        per_operator.iter().map(|t| t.normalized_score).sum::<f64>() / per_operator.len() as f64;
    Ok(AggregateOutcome {
        per_operator,
        excluded,
        overall,
    })
}

/// `overall >= confidence_level`.
pub fn flag(overall: f64, confidence_level: f64) -> bool {
    overall >= confidence_level
}
