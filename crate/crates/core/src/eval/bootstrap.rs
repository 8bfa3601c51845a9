//! Moving-block bootstrap of event-level and near-peak statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cmase::cmase_with_denominator;
use super::events::{detect_events, event_prf, match_events, DetectorConfig};
use super::overall::seasonal_naive_mae;
use crate::error::{Error, Result};
use crate::scalar::{quantile_sorted, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub block: usize,
    pub replicates: usize,
    pub seed: u64,
    pub omegas: Vec<usize>,
    pub deltas: Vec<usize>,
    pub detector: DetectorConfig,
    pub season_lag: usize,
    /// Re-detect prediction events on each resampled prediction series; when
    /// false, events detected once on the original prediction are reused.
    pub redetect_predictions: bool,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            block: 168,
            replicates: 500,
            seed: 2022,
            omegas: vec![6, 12, 24, 36, 48],
            deltas: vec![0, 6, 12, 24, 36, 48],
            detector: DetectorConfig::default(),
            season_lag: 24,
            redetect_predictions: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub statistic: String,
    pub window: usize,
    pub median: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Replicates where the statistic was defined.
    pub n_defined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub block: usize,
    pub seed: u64,
    pub intervals: Vec<Interval>,
}

impl BootstrapSummary {
    pub fn get(&self, statistic: &str, window: usize) -> Option<&Interval> {
        self.intervals.iter().find(|i| i.statistic == statistic && i.window == window)
    }
}

/// Block start offsets for one replicate: `⌈T/block⌉` uniform draws on `0..=T−block`.
pub fn block_offsets(t: usize, block: usize, seed: u64, replicate: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    (0..t.div_ceil(block)).map(|_| rng.gen_range(0..=t - block)).collect()
}

fn resample<T: Copy>(x: &[T], offsets: &[usize], block: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(offsets.len() * block);
    for &o in offsets {
        out.extend_from_slice(&x[o..o + block]);
    }
    out.truncate(x.len());
    out
}

/// Statistics per replicate: recall, precision and F1 per ω, then cMASE per Δ.
fn replicate_stats<T: Real>(y: &[T], yhat: &[T], mask: Option<&[bool]>, denom: Option<T>, fixed_pred: Option<&[usize]>, cfg: &BootstrapConfig) -> Vec<Option<f64>> {
    let masked: Vec<T>;
    let det_input = match mask {
        Some(m) => {
            masked = yhat.iter().zip(m).map(|(&v, &a)| if a { v } else { T::zero() }).collect();
            &masked[..]
        }
        None => yhat,
    };
    let refs = detect_events(y, &cfg.detector).times();
    let preds = match fixed_pred {
        Some(p) => p.to_vec(),
        None => detect_events(det_input, &cfg.detector).times(),
    };
    let mut out = Vec::with_capacity(cfg.omegas.len() * 3 + cfg.deltas.len());
    for &w in &cfg.omegas {
        let prf = event_prf(&match_events(&preds, &refs, w));
        out.extend([prf.recall, prf.precision, prf.f1]);
    }
    let thr = T::lit(cfg.detector.threshold);
    for &d in &cfg.deltas {
        out.push(denom.and_then(|dn| cmase_with_denominator(y, yhat, thr, d, dn, mask).value));
    }
    out
}

/// Paired moving-block bootstrap. `mask` restricts cMASE hours and the
/// prediction events to available hours. The cMASE denominator comes from the
/// original `y` and is reused in every replicate.
pub fn block_bootstrap<T: Real>(y: &[T], yhat: &[T], mask: Option<&[bool]>, cfg: &BootstrapConfig) -> Result<BootstrapSummary> {
    if cfg.replicates < 1 {
        return Err(Error::Config("bootstrap needs at least one replicate".into()));
    }
    if y.len() != yhat.len() || mask.is_some_and(|m| m.len() != y.len()) {
        return Err(Error::Shape { expected: y.len(), got: yhat.len() });
    }
    if cfg.block == 0 || y.len() < cfg.block {
        return Err(Error::InvalidInput(format!("series length {} is shorter than the block length {}", y.len(), cfg.block)));
    }
    // a zero denominator leaves every cMASE statistic undefined
    let denom = seasonal_naive_mae(y, cfg.season_lag).filter(|d| *d > T::zero());
    let fixed_pred = (!cfg.redetect_predictions).then(|| {
        let masked: Vec<T> = match mask {
            Some(m) => yhat.iter().zip(m).map(|(&v, &a)| if a { v } else { T::zero() }).collect(),
            None => yhat.to_vec(),
        };
        detect_events(&masked, &cfg.detector).times()
    });
    let reps: Vec<Vec<Option<f64>>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let off = block_offsets(y.len(), cfg.block, cfg.seed, r);
            let ry = resample(y, &off, cfg.block);
            let rh = resample(yhat, &off, cfg.block);
            let rm = mask.map(|m| resample(m, &off, cfg.block));
            replicate_stats(&ry, &rh, rm.as_deref(), denom, fixed_pred.as_deref(), cfg)
        })
        .collect();
    let mut labels: Vec<(String, usize)> = Vec::new();
    for &w in &cfg.omegas {
        labels.extend(["recall", "precision", "f1"].map(|s| (s.to_string(), w)));
    }
    labels.extend(cfg.deltas.iter().map(|&d| ("cmase".to_string(), d)));
    let intervals = labels
        .into_iter()
        .enumerate()
        .map(|(k, (statistic, window))| {
            let mut v: Vec<f64> = reps.iter().filter_map(|r| r[k]).collect();
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
            let q = |p: f64| (!v.is_empty()).then(|| quantile_sorted(&v, p));
            Interval { statistic, window, median: q(0.5), lower: q(0.025), upper: q(0.975), n_defined: v.len() }
        })
        .collect();
    Ok(BootstrapSummary { replicates: cfg.replicates, block: cfg.block, seed: cfg.seed, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn season(t: usize) -> (Vec<f64>, Vec<f64>) {
        let y: Vec<f64> = (0..t)
            .map(|i| {
                let storm = if (i % 400) > 200 && (i % 400) < 215 { 70_000.0 } else { 0.0 };
                storm + 3_000.0 + ((i * 7919) % 1000) as f64 * 5.0
            })
            .collect();
        let yhat: Vec<f64> = (0..t).map(|i| y[(i + t - 3) % t] * 0.9).collect();
        (y, yhat)
    }

    fn small_cfg(b: usize) -> BootstrapConfig {
        BootstrapConfig { replicates: b, ..Default::default() }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (y, yh) = season(1200);
        let a = block_bootstrap(&y, &yh, None, &small_cfg(60)).unwrap();
        let b = block_bootstrap(&y, &yh, None, &small_cfg(60)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn full_length_block_reproduces_series() {
        let (y, yh) = season(900);
        let cfg = BootstrapConfig { block: 900, ..small_cfg(25) };
        let s = block_bootstrap(&y, &yh, None, &cfg).unwrap();
        for iv in &s.intervals {
            assert_eq!(iv.lower, iv.upper, "{}", iv.statistic);
            assert_eq!(iv.median, iv.upper);
        }
    }

    #[test]
    fn constant_series_gives_zero_width() {
        let y = vec![7.0; 800];
        let yh = vec![5.0; 800];
        let s = block_bootstrap(&y, &yh, None, &small_cfg(20)).unwrap();
        assert!(s.intervals.iter().all(|i| i.lower == i.upper));
        assert!(block_bootstrap(&y, &yh, None, &small_cfg(0)).is_err());
    }

    #[test]
    fn median_inside_interval() {
        let (y, yh) = season(2000);
        let s = block_bootstrap(&y, &yh, None, &small_cfg(500)).unwrap();
        for iv in &s.intervals {
            if let (Some(l), Some(m), Some(u)) = (iv.lower, iv.median, iv.upper) {
                assert!(l <= m && m <= u);
            }
        }
    }
}
