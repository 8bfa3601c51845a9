//! Peak-conditional MASE: errors near state-level peaks scaled by the
//! full-series seasonal-naive MAE.

use serde::{Deserialize, Serialize};

use super::overall::seasonal_naive_mae;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaseEntry {
    pub delta: usize,
    pub n_hours: usize,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmaseTable {
    pub denominator: f64,
    pub entries: Vec<CmaseEntry>,
}

/// Hours within `delta` of some hour with `y ≥ threshold`, intersected with `mask`.
pub fn peak_neighbourhood<T: Real>(y: &[T], threshold: T, delta: usize, mask: Option<&[bool]>) -> Vec<bool> {
    let n = y.len();
    // distance to the nearest peak from the left and right
    let mut dist = vec![usize::MAX; n];
    let mut last: Option<usize> = None;
    for t in 0..n {
        if y[t] >= threshold {
            last = Some(t);
        }
        if let Some(p) = last {
            dist[t] = t - p;
        }
    }
    last = None;
    for t in (0..n).rev() {
        if y[t] >= threshold {
            last = Some(t);
        }
        if let Some(p) = last {
            dist[t] = dist[t].min(p - t);
        }
    }
    (0..n).map(|t| dist[t] <= delta && mask.is_none_or(|m| m[t])).collect()
}

/// One cMASE value with a precomputed denominator.
pub fn cmase_with_denominator<T: Real>(y: &[T], yhat: &[T], threshold: T, delta: usize, denom: T, mask: Option<&[bool]>) -> CmaseEntry {
    let s = peak_neighbourhood(y, threshold, delta, mask);
    let n = s.iter().filter(|&&b| b).count();
    if n == 0 {
        let reason = if y.iter().any(|&v| v >= threshold) { "no available hour near a peak" } else { "no hour reaches the peak threshold" };
        return CmaseEntry { delta, n_hours: 0, value: None, reason: Some(reason.into()) };
    }
    let num = (0..y.len()).filter(|&t| s[t]).map(|t| (y[t] - yhat[t]).abs()).sum::<T>() / T::from_usize_lossy(n);
    CmaseEntry { delta, n_hours: n, value: Some((num / denom).as_f64()), reason: None }
}

/// cMASE for every `delta`; the denominator is the seasonal-naive MAE at lag `h` over all of `y`.
pub fn cmase<T: Real>(y: &[T], yhat: &[T], threshold: T, deltas: &[usize], h: usize, mask: Option<&[bool]>) -> Result<CmaseTable> {
    if y.len() != yhat.len() {
        return Err(Error::Shape { expected: y.len(), got: yhat.len() });
    }
    if let Some(m) = mask {
        if m.len() != y.len() {
            return Err(Error::Shape { expected: y.len(), got: m.len() });
        }
    }
    let denom = seasonal_naive_mae(y, h)
        .filter(|d| *d > T::zero())
        .ok_or_else(|| Error::Degenerate(format!("seasonal-naive MAE at lag {h} is zero or undefined")))?;
    let entries = deltas.iter().map(|&d| cmase_with_denominator(y, yhat, threshold, d, denom, mask)).collect();
    Ok(CmaseTable { denominator: denom.as_f64(), entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::overall_metrics;
    use proptest::prelude::*;

    fn brute(y: &[f64], yhat: &[f64], thr: f64, delta: usize, h: usize) -> Option<f64> {
        let peaks: Vec<usize> = (0..y.len()).filter(|&t| y[t] >= thr).collect();
        let s: Vec<usize> = (0..y.len()).filter(|&t| peaks.iter().any(|&p| t.abs_diff(p) <= delta)).collect();
        if s.is_empty() {
            return None;
        }
        let num: f64 = s.iter().map(|&t| (y[t] - yhat[t]).abs()).sum::<f64>() / s.len() as f64;
        let den: f64 = (h..y.len()).map(|t| (y[t] - y[t - h]).abs()).sum::<f64>() / (y.len() - h) as f64;
        Some(num / den)
    }

    #[test]
    fn plateau_example() {
        let y: Vec<f64> = (0..240).map(|t| if (100..110).contains(&t) { 80_000.0 } else { 1000.0 + (t % 24) as f64 * 50.0 }).collect();
        let yhat: Vec<f64> = y.iter().map(|v| v * 0.8).collect();
        let t = cmase(&y, &yhat, 50_000.0, &[0, 6, 12], 24, None).unwrap();
        for e in &t.entries {
            assert!((e.value.unwrap() - brute(&y, &yhat, 50_000.0, e.delta, 24).unwrap()).abs() < 1e-12);
        }
        assert_eq!(t.entries[1].n_hours, 22);
        let exact = cmase(&y, &y, 50_000.0, &[0], 24, None).unwrap();
        assert_eq!(exact.entries[0].value, Some(0.0));
        let none = cmase(&y, &yhat, 1e9, &[0], 24, None).unwrap();
        assert_eq!(none.entries[0].value, None);
    }

    proptest! {
        #[test]
        fn matches_brute_force(y in prop::collection::vec(0.0..100_000.0f64, 30..500),
                               noise in prop::collection::vec(-20_000.0..20_000.0f64, 500),
                               delta in 0usize..60) {
            let yhat: Vec<f64> = y.iter().zip(&noise).map(|(a, b)| (a + b).max(0.0)).collect();
            let t = cmase(&y, &yhat, 60_000.0, &[delta], 24, None).unwrap();
            let b = brute(&y, &yhat, 60_000.0, delta, 24);
            match (t.entries[0].value, b) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0)),
                (None, None) => {}
                other => prop_assert!(false, "{other:?}"),
            }
            let z = cmase(&y, &yhat, 0.0, &[0], 24, None).unwrap().entries[0].value.unwrap();
            let m = overall_metrics(&y, &yhat, 24).unwrap().mase.unwrap();
            prop_assert!((z - m).abs() <= 1e-12 * m.max(1.0));
        }
    }
}
