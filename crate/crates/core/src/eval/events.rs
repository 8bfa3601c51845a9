//! Cluster peak detector, greedy one-to-one event matching and event-level P/R/F1.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub threshold: f64,
    pub ma_k: usize,
    pub merge_gap: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { threshold: 50_000.0, ma_k: 5, merge_gap: 24 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Index into the hourly series.
    pub time: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventList {
    pub events: Vec<Event>,
    pub config: DetectorConfig,
}

impl EventList {
    pub fn times(&self) -> Vec<usize> {
        self.events.iter().map(|e| e.time).collect()
    }
}

/// Centered moving average of width `k`; windows are truncated at the series edges.
pub fn centered_ma<T: Real>(y: &[T], k: usize) -> Vec<T> {
    let k = k.max(1);
    let back = (k - 1) / 2;
    let fwd = k / 2;
    let mut prefix = vec![T::zero(); y.len() + 1];
    for (t, &v) in y.iter().enumerate() {
        prefix[t + 1] = prefix[t] + v;
    }
    (0..y.len())
        .map(|t| {
            let lo = t.saturating_sub(back);
            let hi = (t + fwd + 1).min(y.len());
            (prefix[hi] - prefix[lo]) / T::from_usize_lossy(hi - lo)
        })
        .collect()
}

/// Smoothed-above-threshold segments, merged across gaps of at most
/// `merge_gap` hours, as inclusive index ranges.
pub fn event_segments<T: Real>(y: &[T], cfg: &DetectorConfig) -> Vec<(usize, usize)> {
    let s = centered_ma(y, cfg.ma_k);
    let thr = T::lit(cfg.threshold);
    let mut segs: Vec<(usize, usize)> = Vec::new();
    let mut t = 0;
    while t < s.len() {
        if s[t] >= thr {
            let start = t;
            while t + 1 < s.len() && s[t + 1] >= thr {
                t += 1;
            }
            match segs.last_mut() {
                Some(last) if start - last.1 - 1 <= cfg.merge_gap => last.1 = t,
                _ => segs.push((start, t)),
            }
        }
        t += 1;
    }
    segs
}

/// One event per merged segment at the earliest argmax of the raw series.
pub fn detect_events<T: Real>(y: &[T], cfg: &DetectorConfig) -> EventList {
    let events = event_segments(y, cfg)
        .into_iter()
        .map(|(a, b)| {
            let mut best = a;
            for t in a..=b {
                if y[t] > y[best] {
                    best = t;
                }
            }
            Event { time: best, magnitude: y[best].as_f64() }
        })
        .collect();
    EventList { events, config: *cfg }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(pred time, ref time)` in acceptance order.
    pub pairs: Vec<(usize, usize)>,
    pub misses: Vec<usize>,
    pub false_alarms: Vec<usize>,
    pub omega: usize,
}

impl MatchResult {
    pub fn hits(&self) -> usize {
        self.pairs.len()
    }
}

/// Greedy nearest-time matching: candidate pairs within `omega` sorted by
/// `|Δt|`, then reference time, then prediction time.
pub fn match_events(pred: &[usize], reference: &[usize], omega: usize) -> MatchResult {
    let mut cands: Vec<(usize, usize, usize, usize, usize)> = Vec::new();
    for (pi, &p) in pred.iter().enumerate() {
        for (ri, &r) in reference.iter().enumerate() {
            let d = p.abs_diff(r);
            if d <= omega {
                cands.push((d, r, p, pi, ri));
            }
        }
    }
    cands.sort_unstable();
    let mut pred_used = vec![false; pred.len()];
    let mut ref_used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    for (_, r, p, pi, ri) in cands {
        if !pred_used[pi] && !ref_used[ri] {
            pred_used[pi] = true;
            ref_used[ri] = true;
            pairs.push((p, r));
        }
    }
    MatchResult {
        pairs,
        misses: (0..reference.len()).filter(|&i| !ref_used[i]).map(|i| reference[i]).collect(),
        false_alarms: (0..pred.len()).filter(|&i| !pred_used[i]).map(|i| pred[i]).collect(),
        omega,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventPrf {
    pub hits: usize,
    pub misses: usize,
    pub false_alarms: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

/// Precision, recall and F1 from event counts; undefined ratios are absent.
pub fn event_prf_counts(hits: usize, misses: usize, false_alarms: usize) -> EventPrf {
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let precision = ratio(hits, hits + false_alarms);
    let recall = ratio(hits, hits + misses);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    EventPrf { hits, misses, false_alarms, precision, recall, f1 }
}

pub fn event_prf(m: &MatchResult) -> EventPrf {
    event_prf_counts(m.hits(), m.misses.len(), m.false_alarms.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn plateaus(gap: usize) -> Vec<f64> {
        let mut y = vec![0.0; 30];
        y.extend(vec![60_000.0; 10]);
        y.extend(vec![1_000.0; gap]);
        y.extend(vec![60_000.0; 10]);
        y.extend(vec![0.0; 30]);
        y[30 + 10 + gap + 4] = 61_000.0;
        y
    }

    #[test]
    fn detector_examples() {
        let cfg = DetectorConfig::default();
        assert!(detect_events(&[0.0; 100], &cfg).events.is_empty());
        let mut spike = vec![0.0f64; 50];
        spike[20] = 60_000.0;
        assert!(detect_events(&spike, &cfg).events.is_empty());
        assert!((centered_ma::<f64>(&spike, 5)[20] - 12_000.0).abs() < 1e-9);
        assert_eq!(detect_events(&plateaus(30), &cfg).events.len(), 2);
        let merged = detect_events(&plateaus(20), &cfg);
        assert_eq!(merged.events.len(), 1);
        assert_eq!(merged.events[0].time, 30 + 10 + 20 + 4);
        assert_eq!(merged.events[0].magnitude, 61_000.0);
    }

    #[test]
    fn edge_windows_are_truncated() {
        let y = [10.0, 20.0, 30.0, 40.0];
        assert_eq!(centered_ma(&y, 5), vec![20.0, 25.0, 25.0, 30.0]);
    }

    #[test]
    fn matching_examples() {
        let m = match_events(&[5, 50, 90], &[5, 50, 90], 0);
        assert_eq!((m.hits(), m.false_alarms.len()), (3, 0));
        let m = match_events(&[90], &[100], 6);
        assert_eq!((m.hits(), m.misses, m.false_alarms), (0, vec![100], vec![90]));
        assert_eq!(match_events(&[90], &[100], 12).hits(), 1);
        let m = match_events(&[98, 104], &[100], 6);
        assert_eq!(m.pairs, vec![(98, 100)]);
        assert_eq!(m.false_alarms, vec![104]);
    }

    #[test]
    fn prf_rows() {
        let p = event_prf_counts(3, 1, 2);
        assert_eq!(format!("{:.2} {:.2} {:.2}", p.precision.unwrap() * 100.0, p.recall.unwrap() * 100.0, p.f1.unwrap() * 100.0), "60.00 75.00 66.67");
        let p = event_prf_counts(2, 2, 1);
        assert_eq!(format!("{:.2} {:.2} {:.2}", p.precision.unwrap() * 100.0, p.recall.unwrap() * 100.0, p.f1.unwrap() * 100.0), "66.67 50.00 57.14");
        let p = event_prf_counts(0, 4, 0);
        assert_eq!((p.precision, p.recall, p.f1), (None, Some(0.0), None));
    }

    /// Detector written directly from the rule text: enumerate maximal runs,
    /// then merge by repeated pairwise passes.
    fn brute_detect(y: &[f64], cfg: &DetectorConfig) -> Vec<(usize, f64)> {
        let n = y.len();
        let half_b = (cfg.ma_k - 1) / 2;
        let half_f = cfg.ma_k / 2;
        let sm: Vec<f64> = (0..n)
            .map(|t| {
                let w: Vec<f64> = (0..n).filter(|&s| s + half_b >= t && s <= t + half_f).map(|s| y[s]).collect();
                w.iter().sum::<f64>() / w.len() as f64
            })
            .collect();
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for a in 0..n {
            for b in a..n {
                let inside = (a..=b).all(|t| sm[t] >= cfg.threshold);
                let left = a == 0 || sm[a - 1] < cfg.threshold;
                let right = b + 1 == n || sm[b + 1] < cfg.threshold;
                if inside && left && right {
                    runs.push((a, b));
                }
            }
        }
        loop {
            let mut merged = false;
            for i in 0..runs.len().saturating_sub(1) {
                if runs[i + 1].0 - runs[i].1 - 1 <= cfg.merge_gap {
                    runs[i].1 = runs[i + 1].1;
                    runs.remove(i + 1);
                    merged = true;
                    break;
                }
            }
            if !merged {
                break;
            }
        }
        runs.iter()
            .map(|&(a, b)| {
                let m = (a..=b).map(|t| y[t]).fold(f64::NEG_INFINITY, f64::max);
                let t = (a..=b).find(|&t| y[t] == m).unwrap();
                (t, m)
            })
            .collect()
    }

    fn bursty() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![3 => 0.0..40_000.0f64, 2 => 40_000.0..120_000.0f64], 1..300)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn detector_matches_brute_force(y in bursty(), k in 1usize..8, gap in 0usize..30) {
            let cfg = DetectorConfig { threshold: 50_000.0, ma_k: k, merge_gap: gap };
            let got: Vec<(usize, f64)> = detect_events(&y, &cfg).events.iter().map(|e| (e.time, e.magnitude)).collect();
            prop_assert_eq!(got, brute_detect(&y, &cfg));
        }

        #[test]
        fn detector_invariants(y in bursty(), t2 in 50_000.0..150_000.0f64) {
            let cfg = DetectorConfig::default();
            let ev = detect_events(&y, &cfg);
            let segs = event_segments(&y, &cfg);
            prop_assert!(ev.events.windows(2).all(|w| w[0].time < w[1].time));
            for (e, s) in ev.events.iter().zip(&segs) {
                prop_assert!(e.time >= s.0 && e.time <= s.1);
            }
            // a higher threshold can split a segment, so the count may grow;
            // its segments and events nest inside the lower-threshold ones
            let hcfg = DetectorConfig { threshold: t2, ..cfg };
            let hi = detect_events(&y, &hcfg);
            let inside = |t: usize| segs.iter().any(|s| t >= s.0 && t <= s.1);
            for (a, b) in event_segments(&y, &hcfg) {
                prop_assert!(inside(a) && inside(b));
            }
            prop_assert!(hi.events.iter().all(|e| inside(e.time)));
        }

        #[test]
        fn matching_invariants(mut p in prop::collection::btree_set(0usize..500, 0..12),
                               r in prop::collection::btree_set(0usize..500, 0..12),
                               w1 in 0usize..100, w2 in 0usize..100) {
            let p: Vec<usize> = std::mem::take(&mut p).into_iter().collect();
            let r: Vec<usize> = r.into_iter().collect();
            let (lo, hi) = (w1.min(w2), w1.max(w2));
            let a = match_events(&p, &r, lo);
            let b = match_events(&p, &r, hi);
            prop_assert!(a.hits() <= b.hits());
            for m in [&a, &b] {
                prop_assert_eq!(m.hits() + m.misses.len(), r.len());
                prop_assert_eq!(m.hits() + m.false_alarms.len(), p.len());
                prop_assert!(m.pairs.iter().all(|&(x, y)| x.abs_diff(y) <= m.omega));
            }
        }
    }
}
