//! Anomaly flag and log-magnitude targets at the forecast horizon.

use serde::{Deserialize, Serialize};

use crate::scalar::quantile;

/// How the magnitude target is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetMode {
    /// `log1p` of the county's own outage at `t + horizon`.
    #[default]
    County,
    /// `log1p` of the statewide sum at `t + horizon`, repeated on every county row.
    Summed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyTargets {
    pub flag48: Vec<Option<bool>>,
    pub log_mag48: Vec<Option<f64>>,
    /// Threshold on the min-max normalised scale.
    pub threshold: f64,
    pub train_min: f64,
    pub train_max: f64,
    /// Train series was constant; flags fall back to `y > train_min`.
    pub degenerate: bool,
}

/// Targets for one county series (hourly, aligned with the season axis).
/// `train` is the half-open index range used to fit the normaliser and the
/// 90th-percentile threshold.
pub fn build_targets(series: &[Option<f64>], horizon: usize, train: std::ops::Range<usize>) -> CountyTargets {
    let train_vals: Vec<f64> = series[train.start.min(series.len())..train.end.min(series.len())]
        .iter()
        .flatten()
        .copied()
        .collect();
    let lo = train_vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = train_vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = train_vals.is_empty() || !(hi > lo);
    let (lo, hi) = if train_vals.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let norm = |v: f64| (v - lo) / (hi - lo);
    let threshold = if degenerate {
        0.0
    } else {
        let normed: Vec<f64> = train_vals.iter().map(|&v| norm(v)).collect();
        quantile(&normed, 0.9).unwrap_or(0.0)
    };
    let n = series.len();
    let mut flag48 = vec![None; n];
    let mut log_mag48 = vec![None; n];
    for t in 0..n.saturating_sub(horizon) {
        if let Some(y) = series[t + horizon] {
            flag48[t] = Some(if degenerate { y > lo } else { norm(y) >= threshold });
            log_mag48[t] = Some(y.max(0.0).ln_1p());
        }
    }
    CountyTargets { flag48, log_mag48, threshold, train_min: lo, train_max: hi, degenerate }
}
