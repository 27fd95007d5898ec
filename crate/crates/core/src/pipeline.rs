//! End-to-end scoring of statistic groups against cached references.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, MutexGuard};

use log::debug;
use serde::{Deserialize, Serialize};

use crate::digit::histogram;
use crate::error::Result;
use crate::ingest::{ComputedStats, ReportedStats};
use crate::ks::NullDistribution;
use crate::reference::{
    calibrate_floor, generate_reference, CalibrationConfig, OperatorKind, ReferenceCache,
    ReferenceDistribution, ReferenceKey, SynthesisConfig, DEFAULT_CALIBRATION_SAMPLES,
    DEFAULT_CENTER_RANGE, DEFAULT_DECADE_SPAN, DEFAULT_MC_DRAWS, DEFAULT_NULL_RESAMPLES,
};
use crate::rng::{derive_seed, substream, tag};
use crate::scalar::Scalar;
use crate::scoring::{
    aggregate, score_with_null, AggregateOutcome, InsufficientData, OperatorScore,
    DEFAULT_MIN_SAMPLES,
};

/// Fixed default seed; outputs must be reproducible without flags.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Vector length assumed for reported statistics without an `n` entry.
pub const DEFAULT_REPORT_N: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub seed: u64,
    pub mc_draws: usize,
    pub decade_span: u32,
    pub center_range: (f64, f64),
    pub calibration_samples: usize,
    pub resamples: usize,
    pub min_samples: usize,
    pub default_report_n: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            seed: DEFAULT_SEED,
            mc_draws: DEFAULT_MC_DRAWS,
            decade_span: DEFAULT_DECADE_SPAN,
            center_range: DEFAULT_CENTER_RANGE,
            calibration_samples: DEFAULT_CALIBRATION_SAMPLES,
            resamples: DEFAULT_NULL_RESAMPLES,
            min_samples: DEFAULT_MIN_SAMPLES,
            default_report_n: DEFAULT_REPORT_N,
        }
    }
}

type NullKey = (OperatorKind, usize, u64);

/// Scores statistic groups, generating and calibrating references on demand.
///
/// Safe to share across threads. All randomness is derived from the
/// configured seed and the reference key, so results do not depend on
/// scoring order.
pub struct Scorer {
    config: ScorerConfig,
    cache: Mutex<ReferenceCache>,
    base: Mutex<HashMap<(OperatorKind, usize), Arc<ReferenceDistribution>>>,
    nulls: Mutex<HashMap<NullKey, Arc<NullDistribution>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl Scorer {
    pub fn new(config: ScorerConfig, cache: ReferenceCache) -> Self {
        Scorer {
            config,
            cache: Mutex::new(cache),
            base: Mutex::new(HashMap::new()),
            nulls: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    pub fn synthesis_config(&self, op: OperatorKind, entries_per_vector: usize) -> SynthesisConfig {
        SynthesisConfig {
            entries_per_vector,
            decade_span: self.config.decade_span,
            center_range: self.config.center_range,
            mc_draws: self.config.mc_draws,
            seed: derive_seed(
                self.config.seed,
                &[tag("reference"), tag(op.name()), entries_per_vector as u64],
            ),
        }
    }

    fn base_reference(
        &self,
        op: OperatorKind,
        n_bucket: usize,
    ) -> Result<Arc<ReferenceDistribution>> {
        if let Some(r) = lock(&self.base).get(&(op, n_bucket)) {
            return Ok(r.clone());
        }
        debug!("generating {op} reference for n={n_bucket}");
        let r = Arc::new(generate_reference(
            op,
            &self.synthesis_config(op, n_bucket),
        )?);
        lock(&self.base).insert((op, n_bucket), r.clone());
        Ok(r)
    }

    /// Calibrated reference for `op` on vectors of `entries_per_vector`
    /// values, tested with `observed_len` digits. Lengths are bucketed.
    pub fn reference(
        &self,
        op: OperatorKind,
        entries_per_vector: usize,
        observed_len: usize,
    ) -> Result<ReferenceDistribution> {
        let key = ReferenceKey::new(op, entries_per_vector, observed_len);
        if let Ok(r) = lock(&self.cache).get(&key) {
            return Ok(r.clone());
        }
        let base = self.base_reference(op, key.entries_per_vector)?;
        let cal = CalibrationConfig {
            null_samples: self.config.calibration_samples,
            resamples: self.config.resamples,
            seed: derive_seed(
                self.config.seed,
                &[
                    tag("calibration"),
                    tag(op.name()),
                    key.entries_per_vector as u64,
                    key.observed_len_bucket as u64,
                ],
            ),
        };
        debug!("calibrating {key}");
        let calibrated = calibrate_floor(&base, key.observed_len_bucket, &cal)?;
        let mut cache = lock(&self.cache);
        if let Ok(existing) = cache.get(&key) {
            return Ok(existing.clone());
        }
        cache.insert(calibrated.clone())?;
        cache.store()?;
        Ok(calibrated)
    }

    fn null(&self, reference: &ReferenceDistribution, total: u64) -> Result<Arc<NullDistribution>> {
        let nkey = (reference.operator, reference.entries_per_vector, total);
        if let Some(n) = lock(&self.nulls).get(&nkey) {
            return Ok(n.clone());
        }
        let seed = derive_seed(
            self.config.seed,
            &[
                tag("null"),
                tag(reference.operator.name()),
                reference.entries_per_vector as u64,
                total,
            ],
        );
        let null = Arc::new(NullDistribution::simulate(
            &reference.pmf,
            total,
            self.config.resamples,
            &mut substream(seed, 0),
        )?);
        lock(&self.nulls).insert(nkey, null.clone());
        Ok(null)
    }

    pub fn score_values<T: Scalar>(
        &self,
        op: OperatorKind,
        values: &[T],
        entries_per_vector: usize,
    ) -> Result<OperatorScore> {
        let (hist, skipped) = histogram(values);
        let usable = hist.total() as usize;
        if usable < self.config.min_samples.max(1) {
            return Ok(OperatorScore::InsufficientData(InsufficientData {
                operator: op,
                sample_count: usable,
                skipped,
                required: self.config.min_samples,
            }));
        }
        let reference = self.reference(op, entries_per_vector, usable)?;
        let null = self.null(&reference, hist.total())?;
        score_with_null(values, &reference, &null).map(OperatorScore::Scored)
    }

    pub fn score_groups<'a, T: Scalar>(
        &self,
        groups: impl IntoIterator<Item = (OperatorKind, &'a [T])>,
        entries_per_vector: usize,
    ) -> Result<AggregateOutcome> {
        let outcomes = groups
            .into_iter()
            .map(|(op, values)| self.score_values(op, values, entries_per_vector))
            .collect::<Result<Vec<_>>>()?;
        aggregate(outcomes)
    }

    pub fn score_stats<T: Scalar>(&self, stats: &ComputedStats<T>) -> Result<AggregateOutcome> {
        let groups: Vec<(OperatorKind, Vec<T>)> = OperatorKind::ALL
            .iter()
            .map(|&op| (op, stats.group(op)))
            .collect();
        self.score_groups(
            groups.iter().map(|(op, v)| (*op, v.as_slice())),
            stats.n_rows,
        )
    }

    pub fn report_entries_per_vector(&self, report: &ReportedStats) -> usize {
        report
            .entries_per_vector()
            .unwrap_or(self.config.default_report_n)
    }

    pub fn score_report(&self, report: &ReportedStats) -> Result<AggregateOutcome> {
        let n = self.report_entries_per_vector(report);
        self.score_groups(report.groups.iter().map(|(op, v)| (*op, v.as_slice())), n)
    }

    /// Generates and calibrates every reference the given groups will need,
    /// one key at a time, ahead of parallel scoring.
    pub fn warm<'a, T: Scalar>(
        &self,
        groups: impl IntoIterator<Item = (OperatorKind, &'a [T], usize)>,
    ) -> Result<()> {
        let keys: BTreeSet<ReferenceKey> = groups
            .into_iter()
            .filter_map(|(op, values, n)| {
                let usable = histogram(values).0.total() as usize;
                (usable >= self.config.min_samples.max(1)).then(|| ReferenceKey::new(op, n, usable))
            })
            .collect();
        for key in keys {
            self.reference(
                key.operator,
                key.entries_per_vector,
                key.observed_len_bucket,
            )?;
        }
        Ok(())
    }

    pub fn cache_snapshot(&self) -> ReferenceCache {
        lock(&self.cache).clone()
    }
}
