use std::ops::RangeInclusive;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Column, DatasetMatrix};
use crate::reference::{DEFAULT_CENTER_RANGE, DEFAULT_DECADE_SPAN};
use crate::rng::substream;

/// Shape of the built-in synthetic corpus. Every feature is log-uniform over
/// `decade_span` decades starting at a per-feature offset drawn from
/// `center_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub count: usize,
    pub rows: RangeInclusive<usize>,
    pub features: RangeInclusive<usize>,
    pub decade_span: u32,
    pub center_range: (f64, f64),
    pub seed: u64,
}

impl SyntheticCorpus {
    pub fn new(count: usize, seed: u64) -> Self {
        SyntheticCorpus {
            count,
            rows: 20..=200,
            features: 5..=20,
            decade_span: DEFAULT_DECADE_SPAN,
            center_range: DEFAULT_CENTER_RANGE,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows.is_empty() || *self.rows.start() < 2 {
            return Err(Error::InvalidConfig(
                "synthetic datasets need at least 2 rows".into(),
            ));
        }
        if self.features.is_empty() || *self.features.start() < 1 {
            return Err(Error::InvalidConfig(
                "synthetic datasets need at least 1 feature".into(),
            ));
        }
        let (lo, hi) = self.center_range;
        if !(lo.is_finite()
            && hi.is_finite()
            && lo <= hi
            && lo >= -280.0
            && hi + f64::from(self.decade_span) <= 280.0)
        {
            return Err(Error::InvalidConfig(format!(
                "bad center_range [{lo}, {hi}]"
            )));
        }
        Ok(())
    }

    /// Dataset `index`, independent of every other index.
    pub fn dataset(&self, index: usize) -> Result<DatasetMatrix<f64>> {
        self.validate()?;
        let mut rng = substream(self.seed, index as u64);
        let n_rows = rng.random_range(self.rows.clone());
        let n_features = rng.random_range(self.features.clone());
        let span = f64::from(self.decade_span);
        let (lo, hi) = self.center_range;
        let columns = (0..n_features)
            .map(|j| {
                let c = lo + (hi - lo) * rng.random::<f64>();
                let values = (0..n_rows)
                    .map(|_| 10f64.powf(c + span * rng.random::<f64>()))
                    .collect();
                Column {
                    label: format!("x{}", j + 1),
                    values,
                }
            })
            .collect();
        DatasetMatrix::new(format!("synthetic-{index:03}"), columns)
    }

    pub fn generate(&self) -> Result<Vec<DatasetMatrix<f64>>> {
        (0..self.count)
            .into_par_iter()
            .map(|i| self.dataset(i))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_within_bounds() {
        let corpus = SyntheticCorpus::new(12, 5).generate().unwrap();
        assert_eq!(corpus.len(), 12);
        for (i, d) in corpus.iter().enumerate() {
            assert_eq!(d.name, format!("synthetic-{i:03}"));
            assert!((20..=200).contains(&d.n_rows));
            assert!((5..=20).contains(&d.n_features()));
            for c in &d.columns {
                let lo = c.values.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.values.iter().cloned().fold(0.0, f64::max);
                assert!(lo >= 1e-3 && hi < 1e6);
                assert!(hi / lo < 1e3);
            }
        }
    }

    #[test]
    fn seeded_and_index_stable() {
        let a = SyntheticCorpus::new(4, 9).generate().unwrap();
        let b = SyntheticCorpus::new(8, 9).generate().unwrap();
        assert_eq!(a[..], b[..4]);
        assert_ne!(SyntheticCorpus::new(1, 10).dataset(0).unwrap(), a[0]);
    }
}
