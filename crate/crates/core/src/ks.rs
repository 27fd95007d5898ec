//! Discrete Kolmogorov-Smirnov test on leading-digit histograms.
//!
//! Leading digits are discrete, so the asymptotic KS distribution does not
//! apply. The p-value is estimated by resampling histograms of the same size
//! from the reference pmf, with add-one smoothing so it is never zero.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::digit::{DigitHistogram, DigitPmf, DIGITS};
use crate::error::{Error, Result};

/// Default number of resampled histograms for a one-off p-value.
pub const DEFAULT_RESAMPLES: usize = 2000;

/// Statistics closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub resamples: usize,
}

/// `max_d |F_a(d) - F_b(d)|`.
pub fn ks_distance(a: &[f64; DIGITS], b: &[f64; DIGITS]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn ks_discrete(observed: &DigitHistogram, reference: &DigitPmf) -> Result<f64> {
    Ok(ks_distance(&observed.cdf()?, &reference.cdf()))
}

/// Draws a histogram of `total` i.i.d. digits from `pmf`.
///
/// Uses sequential conditional binomials, so the cost does not grow with
/// `total`.
pub fn sample_histogram<R: Rng + ?Sized>(
    pmf: &DigitPmf,
    total: u64,
    rng: &mut R,
) -> DigitHistogram {
    let probs = pmf.probs();
    let mut counts = [0u64; DIGITS];
    let mut remaining = total;
    let mut mass = 1.0;
    for i in 0..DIGITS - 1 {
        if remaining == 0 {
            break;
        }
        let p = if mass > 0.0 {
            (probs[i] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let k = if p >= 1.0 {
            remaining
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining, p).expect("p in (0,1)").sample(rng)
        };
        counts[i] = k;
        remaining -= k;
        mass -= probs[i];
    }
    counts[DIGITS - 1] += remaining;
    DigitHistogram::from_counts(counts)
}

/// Simulated null distribution of the KS statistic for samples of a fixed size.
#[derive(Debug, Clone)]
pub struct NullDistribution {
    total: u64,
    sorted: Vec<f64>,
}

impl NullDistribution {
    pub fn simulate<R: Rng + ?Sized>(
        reference: &DigitPmf,
        total: u64,
        resamples: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if total == 0 {
            return Err(Error::EmptyHistogram);
        }
        if resamples == 0 {
            return Err(Error::InvalidConfig("resamples must be positive".into()));
        }
        let ref_cdf = reference.cdf();
        let mut sorted: Vec<f64> = (0..resamples)
            .map(|_| {
                let h = sample_histogram(reference, total, rng);
                ks_distance(&h.cdf().expect("total > 0"), &ref_cdf)
            })
            .collect();
        sorted.sort_by(f64::total_cmp);
        Ok(NullDistribution { total, sorted })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn resamples(&self) -> usize {
        self.sorted.len()
    }

    /// `(1 + #{resampled >= statistic}) / (resamples + 1)`.
    pub fn p_value(&self, statistic: f64) -> f64 {
        let threshold = statistic - TIE_TOLERANCE;
        let below = self.sorted.partition_point(|&s| s < threshold);
        let at_least = self.sorted.len() - below;
        (1 + at_least) as f64 / (self.sorted.len() + 1) as f64
    }
}

/// Monte-Carlo p-value of the discrete KS statistic.
pub fn ks_p_value<R: Rng + ?Sized>(
    observed: &DigitHistogram,
    reference: &DigitPmf,
    resamples: usize,
    rng: &mut R,
) -> Result<KsResult> {
    let statistic = ks_discrete(observed, reference)?;
    let null = NullDistribution::simulate(reference, observed.total(), resamples, rng)?;
    Ok(KsResult {
        statistic,
        p_value: null.p_value(statistic),
        resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digit::benford_pmf;
    use crate::rng::substream;

    fn hist(counts: [u64; 9]) -> DigitHistogram {
        DigitHistogram::from_counts(counts)
    }

    #[test]
    fn statistic_examples() {
        let b = benford_pmf();
        let d = ks_discrete(&hist([10, 0, 0, 0, 0, 0, 0, 0, 0]), &b).unwrap();
        assert!((d - (1.0 - 2f64.log10())).abs() < 1e-12);

        // Uniform frequencies: brute-force the CDF gap.
        let fb = b.cdf();
        let expected = (1..=9)
            .map(|k| (k as f64 / 9.0 - fb[k - 1]).abs())
            .fold(0.0, f64::max);
        let d = ks_discrete(&hist([1; 9]), &b).unwrap();
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 0.268_726_7).abs() < 1e-6);

        let exact = DigitPmf::new([0.5, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(
            ks_discrete(&hist([2, 1, 1, 0, 0, 0, 0, 0, 0]), &exact).unwrap(),
            0.0
        );

        assert!(matches!(
            ks_discrete(&hist([0; 9]), &b),
            Err(Error::EmptyHistogram)
        ));
    }

    #[test]
    fn symmetric_between_exact_distributions() {
        let a = hist([2, 1, 1, 0, 0, 0, 0, 0, 0]);
        let b = hist([1, 1, 1, 1, 0, 0, 0, 0, 0]);
        let d1 = ks_discrete(&a, &b.frequencies().unwrap()).unwrap();
        let d2 = ks_discrete(&b, &a.frequencies().unwrap()).unwrap();
        assert_eq!(d1, d2);
        assert!((d1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_statistic_has_p_one() {
        let exact = DigitPmf::new([0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12).unwrap();
        let r = ks_p_value(
            &hist([5, 5, 0, 0, 0, 0, 0, 0, 0]),
            &exact,
            500,
            &mut substream(1, 0),
        )
        .unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn all_nines_is_significant() {
        let r = ks_p_value(
            &hist([0, 0, 0, 0, 0, 0, 0, 0, 30]),
            &benford_pmf(),
            2000,
            &mut substream(2, 0),
        )
        .unwrap();
        assert!(r.p_value < 0.01);
        assert_eq!(r.p_value, 1.0 / 2001.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let h = hist([3, 2, 1, 1, 0, 1, 0, 0, 2]);
        let a = ks_p_value(&h, &benford_pmf(), 1000, &mut substream(7, 0)).unwrap();
        let b = ks_p_value(&h, &benford_pmf(), 1000, &mut substream(7, 0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampled_histograms_have_requested_total() {
        let mut rng = substream(3, 0);
        for total in [1u64, 5, 37, 1000] {
            assert_eq!(
                sample_histogram(&benford_pmf(), total, &mut rng).total(),
                total
            );
        }
        let point = DigitPmf::new([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], 1e-12).unwrap();
        assert_eq!(sample_histogram(&point, 9, &mut rng).counts()[2], 9);
    }

    #[test]
    fn sampled_frequencies_match_pmf() {
        let mut rng = substream(4, 0);
        let mut acc = DigitHistogram::default();
        for _ in 0..2000 {
            acc.merge(&sample_histogram(&benford_pmf(), 50, &mut rng));
        }
        let tv = acc.frequencies().unwrap().total_variation(&benford_pmf());
        assert!(tv < 0.005, "tv = {tv}");
    }

    #[test]
    fn p_value_decreases_with_distance() {
        // Move mass from digit 1 to digit 9 step by step at fixed total.
        let b = benford_pmf();
        let null = NullDistribution::simulate(&b, 40, 4000, &mut substream(5, 0)).unwrap();
        let mut last_d = -1.0;
        let mut last_p = 2.0;
        for moved in 0..=12u64 {
            let h = hist([12 - moved, 7, 5, 4, 3, 3, 2, 2, 2 + moved]);
            let d = ks_discrete(&h, &b).unwrap();
            let p = null.p_value(d);
            assert!(d >= last_d);
            assert!(p <= last_p);
            last_d = d;
            last_p = p;
        }
    }
}
