//! Event-window undersampling of negatives for the classifier training set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimal view of a labelled row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelledRow {
    pub county: usize,
    pub hour: i64,
    pub flag: bool,
}

/// Marks rows lying within `window` hours of a positive whose own
/// `±window` neighbourhood (same county) holds at least `min_anoms` positives.
pub fn in_event_window(rows: &[LabelledRow], window: i64, min_anoms: usize) -> Vec<bool> {
    use std::collections::BTreeMap;
    let mut positives: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.flag) {
        positives.entry(r.county).or_default().push(r.hour);
    }
    let mut spans: BTreeMap<usize, Vec<(i64, i64)>> = BTreeMap::new();
    for (county, hours) in positives.iter_mut() {
        hours.sort_unstable();
        for &h in hours.iter() {
            let lo = hours.partition_point(|&x| x < h - window);
            let hi = hours.partition_point(|&x| x <= h + window);
            if hi - lo >= min_anoms {
                spans.entry(*county).or_default().push((h - window, h + window));
            }
        }
    }
    rows.iter()
        .map(|r| {
            spans
                .get(&r.county)
                .is_some_and(|s| s.iter().any(|&(a, b)| r.hour >= a && r.hour <= b))
        })
        .collect()
}

/// Keeps every positive, every negative inside a qualifying event window and
/// each remaining negative with probability `neg_keep`. Returns kept indices
/// in input order. One uniform draw is made per outside negative, in order.
pub fn undersample_event_windows(rows: &[LabelledRow], window: i64, min_anoms: usize, neg_keep: f64, seed: u64) -> Vec<usize> {
    let inside = in_event_window(rows, window, min_anoms);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows.len())
        .filter(|&i| rows[i].flag || inside[i] || rng.gen::<f64>() < neg_keep)
        .collect()
}

/// Outside-window keep probability giving an expected positive share of
/// `target_share` after sampling, clamped to `[0, 1]`.
pub fn tune_neg_keep(rows: &[LabelledRow], window: i64, min_anoms: usize, target_share: f64) -> f64 {
    let inside = in_event_window(rows, window, min_anoms);
    let pos = rows.iter().filter(|r| r.flag).count() as f64;
    let in_neg = rows.iter().zip(&inside).filter(|(r, &w)| !r.flag && w).count() as f64;
    let out_neg = rows.iter().zip(&inside).filter(|(r, &w)| !r.flag && !w).count() as f64;
    if out_neg == 0.0 || pos == 0.0 || !(target_share > 0.0 && target_share < 1.0) {
        return 1.0;
    }
    ((pos / target_share - pos - in_neg) / out_neg).clamp(0.0, 1.0)
}
