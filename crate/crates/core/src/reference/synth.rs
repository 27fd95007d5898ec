use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude model for synthetic Benford-conforming vectors.
///
/// Each vector gets a log-scale offset `c ~ U(center_range)`, and each entry
/// is `10^W` with `W ~ U[c, c + decade_span]`. An integer span makes every
/// entry's leading digit exactly Benford-distributed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub entries_per_vector: usize,
    pub decade_span: u32,
    pub center_range: (f64, f64),
    pub mc_draws: usize,
    pub seed: u64,
}

pub const DEFAULT_DECADE_SPAN: u32 = 3;
pub const DEFAULT_CENTER_RANGE: (f64, f64) = (-3.0, 3.0);
pub const DEFAULT_MC_DRAWS: usize = 100_000;
pub const MIN_MC_DRAWS: usize = 1000;

impl SynthesisConfig {
    pub fn new(entries_per_vector: usize, seed: u64) -> Self {
        SynthesisConfig {
            entries_per_vector,
            decade_span: DEFAULT_DECADE_SPAN,
            center_range: DEFAULT_CENTER_RANGE,
            mc_draws: DEFAULT_MC_DRAWS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries_per_vector == 0 {
            return Err(Error::InvalidConfig(
                "entries_per_vector must be positive".into(),
            ));
        }
        if self.decade_span == 0 {
            return Err(Error::InvalidConfig(
                "decade_span must be at least 1".into(),
            ));
        }
        let (lo, hi) = self.center_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!(
                "bad center_range [{lo}, {hi}]"
            )));
        }
        // Keep 10^W inside f64 range.
        if lo < -280.0 || hi + f64::from(self.decade_span) > 280.0 {
            return Err(Error::InvalidConfig(
                "center_range leaves the f64 exponent range".into(),
            ));
        }
        if self.mc_draws < MIN_MC_DRAWS {
            return Err(Error::InvalidConfig(format!(
                "mc_draws must be at least {MIN_MC_DRAWS}, got {}",
                self.mc_draws
            )));
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// One synthetic vector of `entries_per_vector` positive reals.
pub fn synth_benford_vector<R: Rng + ?Sized>(cfg: &SynthesisConfig, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = cfg.center_range;
    let center = uniform(rng, lo, hi);
    synth_vector_at(cfg, center, rng)
}

/// Like [`synth_benford_vector`] with the log-scale offset fixed.
pub fn synth_vector_at<R: Rng + ?Sized>(
    cfg: &SynthesisConfig,
    center: f64,
    rng: &mut R,
) -> Vec<f64> {
    let span = f64::from(cfg.decade_span);
    (0..cfg.entries_per_vector)
        .map(|_| 10f64.powf(uniform(rng, center, center + span)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digit::{benford_pmf, histogram};
    use crate::rng::substream;

    #[test]
    fn fixed_center_bounds_entries() {
        let cfg = SynthesisConfig::new(500, 1);
        let v = synth_vector_at(&cfg, 0.0, &mut substream(1, 0));
        assert!(v.iter().all(|&x| (1.0..1000.0).contains(&x)));
    }

    #[test]
    fn marginal_digits_are_benford() {
        let cfg = SynthesisConfig::new(10, 42);
        let mut values = Vec::new();
        for i in 0..10_000 {
            values.extend(synth_benford_vector(&cfg, &mut substream(cfg.seed, i)));
        }
        let (h, skipped) = histogram(&values);
        assert_eq!(skipped, 0);
        let tv = h.frequencies().unwrap().total_variation(&benford_pmf());
        assert!(tv <= 0.01, "tv = {tv}");
    }

    #[test]
    fn seeded_vectors_repeat() {
        let cfg = SynthesisConfig::new(8, 5);
        let a = synth_benford_vector(&cfg, &mut substream(5, 17));
        let b = synth_benford_vector(&cfg, &mut substream(5, 17));
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SynthesisConfig::new(5, 0);
        assert!(cfg.validate().is_ok());
        cfg.mc_draws = 999;
        assert!(cfg.validate().is_err());
        let mut cfg = SynthesisConfig::new(0, 0);
        assert!(cfg.validate().is_err());
        cfg.entries_per_vector = 3;
        cfg.decade_span = 0;
        assert!(cfg.validate().is_err());
        cfg.decade_span = 3;
        cfg.center_range = (1.0, -1.0);
        assert!(cfg.validate().is_err());
    }
}
