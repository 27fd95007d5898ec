use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::dataset::DatasetMatrix;
use crate::error::{Error, Result};
use crate::reference::{mean, ols_slope, sample_std, OperatorKind};
use crate::rng::substream;
use crate::scalar::Scalar;

pub const DEFAULT_PAIR_CAP: usize = 200;

/// Slope of feature `response` regressed on feature `regressor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope<T> {
    pub regressor: usize,
    pub response: usize,
    pub value: T,
}

/// Operator outputs over a dataset's features.
///
/// `means[j]`/`stds[j]` are NaN when feature `j` has too few present values;
/// NaN entries are skipped by the digit tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComputedStats<T> {
    pub means: Vec<T>,
    pub stds: Vec<T>,
    pub slopes: Vec<Slope<T>>,
    pub n_rows: usize,
    pub n_features: usize,
    /// Degenerate features and pairs that produced no value.
    pub degenerate: Vec<String>,
}

impl<T: Scalar> ComputedStats<T> {
    pub fn group(&self, op: OperatorKind) -> Vec<T> {
        match op {
            OperatorKind::Mean => self.means.clone(),
            OperatorKind::StdDev => self.stds.clone(),
            OperatorKind::OlsSlope => self.slopes.iter().map(|s| s.value).collect(),
        }
    }

    pub fn group_mut(&mut self, op: OperatorKind) -> Box<dyn Iterator<Item = &mut T> + '_> {
        match op {
            OperatorKind::Mean => Box::new(self.means.iter_mut()),
            OperatorKind::StdDev => Box::new(self.stds.iter_mut()),
            OperatorKind::OlsSlope => Box::new(self.slopes.iter_mut().map(|s| &mut s.value)),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty() && self.stds.is_empty() && self.slopes.is_empty()
    }
}

/// Computes per-feature means and standard deviations and pairwise slopes.
///
/// Missing cells are deleted pairwise. When there are more ordered pairs
/// than `pair_cap`, a seeded uniform subsample of pairs is used, kept in
/// canonical order.
pub fn compute_stats<T: Scalar>(
    d: &DatasetMatrix<T>,
    pair_cap: usize,
    pair_seed: u64,
) -> Result<ComputedStats<T>> {
    let k = d.n_features();
    if k == 0 {
        return Err(Error::DegenerateInput("dataset has no features".into()));
    }
    let mut degenerate = Vec::new();
    let mut means = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for col in &d.columns {
        let present: Vec<T> = col.present().collect();
        means.push(mean(&present).unwrap_or_else(|e| {
            degenerate.push(format!("mean({}): {e}", col.label));
            T::nan()
        }));
        stds.push(sample_std(&present).unwrap_or_else(|e| {
            degenerate.push(format!("std({}): {e}", col.label));
            T::nan()
        }));
    }

    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|j| (0..k).filter(move |&l| l != j).map(move |l| (j, l)))
        .collect();
    let chosen: Vec<(usize, usize)> = if pairs.len() > pair_cap {
        let mut idx = sample(&mut substream(pair_seed, 0), pairs.len(), pair_cap).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pairs[i]).collect()
    } else {
        pairs
    };

    let mut slopes = Vec::with_capacity(chosen.len());
    for (j, l) in chosen {
        let (x, y): (Vec<T>, Vec<T>) = d.columns[j]
            .values
            .iter()
            .zip(&d.columns[l].values)
            .filter(|(a, b)| !a.is_nan() && !b.is_nan())
            .map(|(&a, &b)| (a, b))
            .unzip();
        match ols_slope(&x, &y) {
            Ok(value) => slopes.push(Slope {
                regressor: j,
                response: l,
                value,
            }),
            Err(e) => degenerate.push(format!(
                "slope({} -> {}): {e}",
                d.columns[j].label, d.columns[l].label
            )),
        }
    }

    Ok(ComputedStats {
        means,
        stds,
        slopes,
        n_rows: d.n_rows,
        n_features: k,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::dataset::Column;
    use proptest::prelude::*;

    fn matrix(cols: &[&[f64]]) -> DatasetMatrix<f64> {
        let columns = cols
            .iter()
            .enumerate()
            .map(|(i, v)| Column {
                label: format!("f{}", i + 1),
                values: v.to_vec(),
            })
            .collect();
        DatasetMatrix::new("m", columns).unwrap()
    }

    #[test]
    fn exact_linear_pair() {
        let s = compute_stats(&matrix(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]), 200, 0).unwrap();
        assert_eq!(s.means, vec![2.0, 4.0]);
        assert_eq!(s.stds, vec![1.0, 2.0]);
        assert_eq!(
            s.slopes,
            vec![
                Slope {
                    regressor: 0,
                    response: 1,
                    value: 2.0
                },
                Slope {
                    regressor: 1,
                    response: 0,
                    value: 0.5
                },
            ]
        );
    }

    #[test]
    fn constant_feature() {
        let s = compute_stats(&matrix(&[&[5.0, 5.0, 5.0], &[1.0, 2.0, 4.0]]), 200, 0).unwrap();
        assert_eq!(s.stds[0], 0.0);
        assert_eq!(s.slopes.len(), 1);
        assert_eq!(s.slopes[0].regressor, 1);
        assert_eq!(s.slopes[0].value, 0.0);
        assert_eq!(s.degenerate.len(), 1);
    }

    #[test]
    fn pair_cap_subsamples_reproducibly() {
        let m = matrix(&[&[1.0, 2.0, 4.0], &[3.0, 1.0, 2.0], &[7.0, 8.0, 1.0]]);
        let a = compute_stats(&m, 2, 9).unwrap();
        let b = compute_stats(&m, 2, 9).unwrap();
        assert_eq!(a.slopes.len(), 2);
        assert_eq!(a.slopes, b.slopes);
        assert_eq!(compute_stats(&m, 200, 9).unwrap().slopes.len(), 6);
    }

    #[test]
    fn missing_cells_use_pairwise_deletion() {
        let nan = f64::NAN;
        let s = compute_stats(
            &matrix(&[&[1.0, nan, 3.0, 5.0], &[2.0, 4.0, nan, 10.0]]),
            200,
            0,
        )
        .unwrap();
        assert_eq!(s.means[0], 3.0);
        assert!((s.means[1] - 16.0 / 3.0).abs() < 1e-12);
        // Only rows 0 and 3 are complete.
        assert_eq!(s.slopes[0].value, 2.0);
    }

    #[test]
    fn sparse_feature_yields_nan_stats() {
        let nan = f64::NAN;
        let s = compute_stats(&matrix(&[&[1.0, nan, nan], &[1.0, 2.0, 3.0]]), 200, 0).unwrap();
        assert_eq!(s.means[0], 1.0);
        assert!(s.stds[0].is_nan());
        assert_eq!(s.means.len(), 2);
        assert!(s.slopes.is_empty());
    }

    #[test]
    fn generic_over_f32() {
        let columns = vec![
            Column {
                label: "a".into(),
                values: vec![1.0f32, 2.0, 3.0],
            },
            Column {
                label: "b".into(),
                values: vec![2.0f32, 4.0, 6.0],
            },
        ];
        let s = compute_stats(&DatasetMatrix::new("f", columns).unwrap(), 200, 0).unwrap();
        assert_eq!(s.means, vec![2.0f32, 4.0]);
        assert_eq!(s.slopes[0].value, 2.0f32);
    }

    fn features() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..5, 3usize..12).prop_flat_map(|(k, n)| {
            prop::collection::vec(prop::collection::vec(0.01f64..1000.0, n), k)
        })
    }

    proptest! {
        #[test]
        fn column_order_insensitive(cols in features()) {
            let fwd: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            let rev: Vec<&[f64]> = fwd.iter().rev().copied().collect();
            let a = compute_stats(&matrix(&fwd), 200, 0).unwrap();
            let b = compute_stats(&matrix(&rev), 200, 0).unwrap();
            let sorted = |mut v: Vec<f64>| { v.sort_by(f64::total_cmp); v };
            prop_assert_eq!(sorted(a.means), sorted(b.means));
            prop_assert_eq!(sorted(a.stds), sorted(b.stds));
        }

        #[test]
        fn scale_covariance(cols in features(), j in 0usize..2) {
            let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
            let base = compute_stats(&matrix(&refs), 200, 0).unwrap();
            for (factor, tol) in [(2.0f64, 0.0), (10.0, 1e-12)] {
                let scaled: Vec<f64> = cols[j].iter().map(|v| v * factor).collect();
                let mut refs2 = refs.clone();
                refs2[j] = &scaled;
                let s = compute_stats(&matrix(&refs2), 200, 0).unwrap();
                let close = |a: f64, b: f64| (a - b).abs() <= tol * b.abs();
                prop_assert!(close(s.means[j], base.means[j] * factor));
                prop_assert!(close(s.stds[j], base.stds[j] * factor));
                // Powers of two rescale every intermediate exactly.
                if factor == 2.0 {
                    for (a, b) in s.slopes.iter().zip(&base.slopes) {
                        let ratio = match (a.regressor == j, a.response == j) {
                            (true, false) => 1.0 / factor,
                            (false, true) => factor,
                            _ => 1.0,
                        };
                        prop_assert_eq!(a.value, b.value * ratio);
                    }
                }
            }
        }
    }
}
