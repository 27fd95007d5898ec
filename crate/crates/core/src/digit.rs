//! Leading-digit extraction, the base Benford law and digit histograms.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of possible leading digits.
pub const DIGITS: usize = 9;

/// A leading decimal digit in `1..=9`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit(u8);

impl Digit {
    pub fn new(value: u32) -> Result<Self> {
        if (1..=9).contains(&value) {
            Ok(Digit(value as u8))
        } else {
            Err(Error::InvalidDigit(value))
        }
    }

    pub fn value(self) -> u32 {
        u32::from(self.0)
    }

    /// Zero-based position in a 9-vector.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn all() -> impl Iterator<Item = Digit> {
        (1..=9u8).map(Digit)
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// First significant decimal digit of `|x|`.
///
/// The digit is read from the shortest decimal representation that
/// round-trips to `x`, so `1e-298` yields 1 even though the nearest binary
/// value sits just below the decade.
pub fn leading_digit<T: Scalar>(x: T) -> Result<Digit> {
    if !x.is_finite() || x.is_zero() {
        return Err(Error::ZeroOrNonFinite);
    }
    let mut buf = [0u8; 64];
    let mut out = &mut buf[..];
    write!(out, "{:e}", x.abs()).expect("scientific notation fits in 64 bytes");
    Digit::new(u32::from(buf[0] - b'0'))
}

/// A probability mass function over the nine leading digits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DigitPmf([f64; DIGITS]);

impl DigitPmf {
    /// Validates non-negativity and that the entries sum to one within `tol`.
    pub fn new(probs: [f64; DIGITS], tol: f64) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "pmf has a negative or non-finite entry: {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidConfig(format!("pmf sums to {sum}, not 1")));
        }
        Ok(DigitPmf(probs))
    }

    pub fn uniform() -> Self {
        DigitPmf([1.0 / 9.0; DIGITS])
    }

    pub fn probs(&self) -> &[f64; DIGITS] {
        &self.0
    }

    pub fn prob(&self, d: Digit) -> f64 {
        self.0[d.index()]
    }

    /// Cumulative probabilities `F(1), ..., F(9)`; the last entry is exactly 1.
    pub fn cdf(&self) -> [f64; DIGITS] {
        let mut acc = 0.0;
        let mut out = [0.0; DIGITS];
        for (o, p) in out.iter_mut().zip(self.0.iter()) {
            acc += p;
            *o = acc;
        }
        out[DIGITS - 1] = 1.0;
        out
    }

    /// Half the L1 distance between two pmfs.
    pub fn total_variation(&self, other: &DigitPmf) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// `P(d) = log10(1 + 1/d)`.
pub fn benford_pmf() -> DigitPmf {
    let mut probs = [0.0; DIGITS];
    for (i, p) in probs.iter_mut().enumerate() {
        let d = (i + 1) as f64;
        *p = (1.0 + 1.0 / d).log10();
    }
    DigitPmf(probs)
}

/// Leading-digit counts of a value collection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitHistogram {
    counts: [u64; DIGITS],
}

impl DigitHistogram {
    pub fn from_counts(counts: [u64; DIGITS]) -> Self {
        DigitHistogram { counts }
    }

    pub fn counts(&self) -> &[u64; DIGITS] {
        &self.counts
    }

    pub fn count(&self, d: Digit) -> u64 {
        self.counts[d.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn record(&mut self, d: Digit) {
        self.counts[d.index()] += 1;
    }

    pub fn merge(&mut self, other: &DigitHistogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
    }

    pub fn frequencies(&self) -> Result<DigitPmf> {
        let total = self.total();
        if total == 0 {
            return Err(Error::EmptyHistogram);
        }
        let n = total as f64;
        let mut probs = [0.0; DIGITS];
        for (p, c) in probs.iter_mut().zip(self.counts.iter()) {
            *p = *c as f64 / n;
        }
        Ok(DigitPmf(probs))
    }

    /// Empirical cumulative distribution; exact at the last digit.
    pub fn cdf(&self) -> Result<[f64; DIGITS]> {
        let total = self.total();
        if total == 0 {
            return Err(Error::EmptyHistogram);
        }
        let n = total as f64;
        let mut acc = 0u64;
        let mut out = [0.0; DIGITS];
        for (o, c) in out.iter_mut().zip(self.counts.iter()) {
            acc += c;
            *o = acc as f64 / n;
        }
        Ok(out)
    }
}

/// Histogram of the leading digits of `values`, plus how many entries were
/// skipped because they were zero or non-finite.
pub fn histogram<T: Scalar>(values: &[T]) -> (DigitHistogram, usize) {
    let mut hist = DigitHistogram::default();
    let mut skipped = 0;
    for &v in values {
        match leading_digit(v) {
            Ok(d) => hist.record(d),
            Err(_) => skipped += 1,
        }
    }
    (hist, skipped)
}
