use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ComputedStats;
use crate::reference::OperatorKind;
use crate::scalar::Scalar;

/// Sign applied to each perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPolicy {
    #[default]
    Symmetric,
    Positive,
    Negative,
}

/// Additive noise of `fraction * |group mean|`, `fraction ~ U[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub min_fraction: f64,
    pub max_fraction: f64,
    pub seed: u64,
    #[serde(default)]
    pub sign: SignPolicy,
}

impl NoiseSpec {
    pub fn new(seed: u64) -> Self {
        NoiseSpec {
            min_fraction: 0.01,
            max_fraction: 0.10,
            seed,
            sign: SignPolicy::Symmetric,
        }
    }

    /// A zero-width spec leaves statistics untouched.
    pub fn identity(seed: u64) -> Self {
        NoiseSpec {
            min_fraction: 0.0,
            max_fraction: 0.0,
            ..NoiseSpec::new(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.min_fraction, self.max_fraction);
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "noise fractions must satisfy 0 <= min <= max < 1, got [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

/// Perturbs every statistic `s` to `s + sign * eps * |m|`, where `m` is the
/// mean of the statistic's operator group (or `s` itself when that mean is
/// zero). Missing values stay missing.
pub fn inject_noise<T: Scalar, R: Rng + ?Sized>(
    stats: &ComputedStats<T>,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<ComputedStats<T>> {
    spec.validate()?;
    let mut out = stats.clone();
    for op in OperatorKind::ALL {
        let present: Vec<f64> = stats
            .group(op)
            .into_iter()
            .map(Scalar::to_f64_lossy)
            .filter(|v| v.is_finite())
            .collect();
        let group_mean = if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        for value in out.group_mut(op) {
            // Draw both variates for every entry so streams stay aligned.
            let eps =
                spec.min_fraction + (spec.max_fraction - spec.min_fraction) * rng.random::<f64>();
            let coin: bool = rng.random();
            let s = value.to_f64_lossy();
            if !s.is_finite() {
                continue;
            }
            let sign = match spec.sign {
                SignPolicy::Symmetric => {
                    if coin {
                        1.0
                    } else {
                        -1.0
                    }
                }
                SignPolicy::Positive => 1.0,
                SignPolicy::Negative => -1.0,
            };
            let scale = if group_mean != 0.0 {
                group_mean.abs()
            } else {
                s.abs()
            };
            if eps != 0.0 {
                *value = T::of(s + sign * eps * scale);
            }
        }
    }
    Ok(out)
}
