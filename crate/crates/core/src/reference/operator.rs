use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The statistical operators whose outputs are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "mean")]
    Mean,
    #[serde(rename = "std")]
    StdDev,
    #[serde(rename = "ols_slope")]
    OlsSlope,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [
        OperatorKind::Mean,
        OperatorKind::StdDev,
        OperatorKind::OlsSlope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Mean => "mean",
            OperatorKind::StdDev => "std",
            OperatorKind::OlsSlope => "ols_slope",
        }
    }

    /// Smallest vector length the operator is defined on.
    pub fn min_len(self) -> usize {
        match self {
            OperatorKind::Mean => 1,
            OperatorKind::StdDev | OperatorKind::OlsSlope => 2,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(OperatorKind::Mean),
            "std" => Ok(OperatorKind::StdDev),
            "ols_slope" => Ok(OperatorKind::OlsSlope),
            other => Err(Error::UnknownOperator(other.to_string())),
        }
    }
}

/// Operand of [`apply_operator`]: one vector, or a regressor/response pair.
#[derive(Debug, Clone, Copy)]
pub enum Operand<'a, T> {
    Single(&'a [T]),
    Paired { x: &'a [T], y: &'a [T] },
}

pub fn apply_operator<T: Scalar>(op: OperatorKind, operand: Operand<'_, T>) -> Result<T> {
    match (op, operand) {
        (OperatorKind::Mean, Operand::Single(v)) => mean(v),
        (OperatorKind::StdDev, Operand::Single(v)) => sample_std(v),
        (OperatorKind::OlsSlope, Operand::Paired { x, y }) => ols_slope(x, y),
        (op, _) => Err(Error::DegenerateInput(format!(
            "wrong operand shape for {op}"
        ))),
    }
}

pub fn mean<T: Scalar>(v: &[T]) -> Result<T> {
    if v.is_empty() {
        return Err(Error::DegenerateInput("mean of an empty vector".into()));
    }
    Ok(v.iter().copied().sum::<T>() / T::of(v.len() as f64))
}

/// Standard deviation with the `n - 1` denominator.
pub fn sample_std<T: Scalar>(v: &[T]) -> Result<T> {
    if v.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "standard deviation needs at least 2 values, got {}",
            v.len()
        )));
    }
    let m = mean(v)?;
    let ss: T = v.iter().map(|&x| (x - m) * (x - m)).sum();
    Ok((ss / T::of((v.len() - 1) as f64)).sqrt())
}

/// Slope of the simple least-squares regression of `y` on `x`.
pub fn ols_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DegenerateInput(format!(
            "regressor has {} values, response has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::DegenerateInput(
            "regression needs at least 2 points".into(),
        ));
    }
    let mx = mean(x)?;
    let my = mean(y)?;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * (b - my);
    }
    if sxx.is_nan() || sxx <= T::zero() {
        return Err(Error::DegenerateInput("regressor has zero variance".into()));
    }
    Ok(sxy / sxx)
}
