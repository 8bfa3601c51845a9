//! Whole-series regression metrics on the original scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverallMetrics {
    pub rmse: f64,
    pub mae: f64,
    /// Absent when `y` has zero variance.
    pub r2: Option<f64>,
    /// Absent when the seasonal-naive denominator is zero or undefined.
    pub mase: Option<f64>,
}

/// Mean of `|y_t − y_{t−h}|` over `t = h..T`; `None` with fewer than `h + 2` points.
pub fn seasonal_naive_mae<T: Real>(y: &[T], h: usize) -> Option<T> {
    if h == 0 || y.len() < h + 2 {
        return None;
    }
    let n = y.len() - h;
    Some((h..y.len()).map(|t| (y[t] - y[t - h]).abs()).sum::<T>() / T::from_usize_lossy(n))
}

pub fn overall_metrics<T: Real>(y: &[T], yhat: &[T], h: usize) -> Result<OverallMetrics> {
    if y.len() != yhat.len() {
        return Err(Error::Shape { expected: y.len(), got: yhat.len() });
    }
    if y.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    let n = T::from_usize_lossy(y.len());
    let mae = y.iter().zip(yhat).map(|(&a, &b)| (a - b).abs()).sum::<T>() / n;
    let sse = y.iter().zip(yhat).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>();
    let ybar = y.iter().copied().sum::<T>() / n;
    let sst = y.iter().map(|&a| (a - ybar) * (a - ybar)).sum::<T>();
    let r2 = (sst > T::zero()).then(|| (T::one() - sse / sst).as_f64());
    let mase = seasonal_naive_mae(y, h).filter(|d| *d > T::zero()).map(|d| (mae / d).as_f64());
    Ok(OverallMetrics { rmse: (sse / n).sqrt().as_f64(), mae: mae.as_f64(), r2, mase })
}
