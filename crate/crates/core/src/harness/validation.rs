use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ConfusionMatrix, F1PerClass};
use super::noise::{inject_noise, NoiseSpec};
use crate::error::{Error, Result};
use crate::ingest::{compute_stats, ComputedStats, DatasetMatrix, DEFAULT_PAIR_CAP};
use crate::pipeline::Scorer;
use crate::reference::OperatorKind;
use crate::rng::{derive_seed, substream, tag};
use crate::scalar::Scalar;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    ManipulationFree,
    Manipulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    pub noise: NoiseSpec,
    /// Datasets with `overall >= threshold` are predicted manipulated.
    pub threshold: f64,
    /// Seeds the clean/manipulated split and slope-pair subsampling.
    pub seed: u64,
    pub pair_cap: usize,
}

impl ValidationConfig {
    pub fn new(seed: u64) -> Self {
        ValidationConfig {
            noise: NoiseSpec::new(seed),
            threshold: DEFAULT_THRESHOLD,
            seed,
            pair_cap: DEFAULT_PAIR_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetVerdict {
    pub name: String,
    pub truth: Truth,
    pub overall: f64,
    pub decision: Truth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedDataset {
    pub name: String,
    pub truth: Truth,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub matrix: ConfusionMatrix,
    pub accuracy: f64,
    pub f1_per_class: F1PerClass,
    pub threshold: f64,
    pub per_dataset: Vec<DatasetVerdict>,
    pub excluded: Vec<ExcludedDataset>,
}

struct Prepared<T> {
    index: usize,
    truth: Truth,
    stats: Result<ComputedStats<T>>,
}

/// Half the datasets keep their computed statistics, the other half get
/// noise injected; each is then scored and classified at the threshold.
///
/// Datasets that cannot be scored are excluded from the matrix and listed.
pub fn run_validation<T: Scalar>(
    datasets: &[DatasetMatrix<T>],
    config: &ValidationConfig,
    scorer: &Scorer,
) -> Result<ValidationResult> {
    let n = datasets.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "validation needs an even number of datasets (at least 2), got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&config.threshold) {
        return Err(Error::InvalidConfig(format!(
            "threshold must lie in [0, 1], got {}",
            config.threshold
        )));
    }
    config.noise.validate()?;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(derive_seed(config.seed, &[tag("split")]), 0));
    let mut truth = vec![Truth::ManipulationFree; n];
    for &i in &order[n / 2..] {
        truth[i] = Truth::Manipulated;
    }

    let noise_seed = derive_seed(config.noise.seed, &[tag("noise")]);
    let prepared: Vec<Prepared<T>> = datasets
        .par_iter()
        .enumerate()
        .map(|(index, d)| {
            let pair_seed = derive_seed(config.seed, &[tag("pairs"), index as u64]);
            let stats =
                compute_stats(d, config.pair_cap, pair_seed).and_then(|s| match truth[index] {
                    Truth::ManipulationFree => Ok(s),
                    Truth::Manipulated => {
                        inject_noise(&s, &config.noise, &mut substream(noise_seed, index as u64))
                    }
                });
            Prepared {
                index,
                truth: truth[index],
                stats,
            }
        })
        .collect();

    let groups: Vec<(OperatorKind, Vec<T>, usize)> = prepared
        .iter()
        .filter_map(|p| p.stats.as_ref().ok())
        .flat_map(|s| {
            OperatorKind::ALL
                .iter()
                .map(move |&op| (op, s.group(op), s.n_rows))
        })
        .collect();
    scorer.warm(groups.iter().map(|(op, v, n)| (*op, v.as_slice(), *n)))?;

    let scored: Vec<(usize, Truth, Result<f64>)> = prepared
        .into_par_iter()
        .map(|p| {
            let overall = p
                .stats
                .and_then(|s| scorer.score_stats(&s))
                .map(|a| a.overall);
            (p.index, p.truth, overall)
        })
        .collect();

    let mut matrix = ConfusionMatrix::default();
    let mut per_dataset = Vec::new();
    let mut excluded = Vec::new();
    for (index, truth, overall) in scored {
        let name = datasets[index].name.clone();
        match overall {
            Ok(overall) => {
                let decision = if overall >= config.threshold {
                    Truth::Manipulated
                } else {
                    Truth::ManipulationFree
                };
                matrix.record(
                    truth == Truth::ManipulationFree,
                    decision == Truth::ManipulationFree,
                );
                per_dataset.push(DatasetVerdict {
                    name,
                    truth,
                    overall,
                    decision,
                });
            }
            Err(e) => {
                warn!("excluding dataset {name}: {e}");
                excluded.push(ExcludedDataset {
                    name,
                    truth,
                    reason: e.to_string(),
                });
            }
        }
    }
    per_dataset.sort_by(|a, b| a.name.cmp(&b.name).then(a.truth.cmp(&b.truth)));
    excluded.sort_by(|a, b| a.name.cmp(&b.name).then(a.truth.cmp(&b.truth)));

    Ok(ValidationResult {
        accuracy: matrix.accuracy(),
        f1_per_class: matrix.f1_per_class(),
        matrix,
        threshold: config.threshold,
        per_dataset,
        excluded,
    })
}
