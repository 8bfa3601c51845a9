//! Pearson correlation ranking and greedy collinearity screening.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Sample Pearson correlation over pairs where both values are finite.
/// Returns `(r, n, degenerate)`; zero variance or fewer than 2 pairs gives `r = 0`, degenerate.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> (T, usize, bool) {
    let pairs: Vec<(T, T)> = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(&a, &b)| (a, b)).collect();
    let n = pairs.len();
    if n < 2 {
        return (T::zero(), n, true);
    }
    let nn = T::from_usize_lossy(n);
    let mx = pairs.iter().map(|p| p.0).sum::<T>() / nn;
    let my = pairs.iter().map(|p| p.1).sum::<T>() / nn;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for &(a, b) in &pairs {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return (T::zero(), n, true);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).max(-T::one()).min(T::one());
    (r, n, false)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub name: String,
    pub r: f64,
    pub n: usize,
    pub degenerate: bool,
}

/// Correlation of every column with `target`, sorted by |r| descending (ties by column order).
pub fn pearson_rank(names: &[String], columns: &[Vec<f64>], target: &[f64]) -> Vec<RankedFeature> {
    let mut out: Vec<(usize, RankedFeature)> = names
        .iter()
        .zip(columns)
        .enumerate()
        .map(|(i, (name, col))| {
            let (r, n, degenerate) = pearson(col, target);
            (i, RankedFeature { name: name.clone(), r, n, degenerate })
        })
        .collect();
    out.sort_by(|a, b| b.1.r.abs().partial_cmp(&a.1.r.abs()).unwrap().then(a.0.cmp(&b.0)));
    out.into_iter().map(|x| x.1).collect()
}

/// Walks `ranking` in order and keeps a feature unless its |r| with an
/// already retained feature exceeds `r_max`. `column` maps a name to its values.
pub fn collinearity_screen<'a>(ranking: &[RankedFeature], column: impl Fn(&str) -> &'a [f64], r_max: f64) -> Vec<String> {
    let mut kept: Vec<&str> = Vec::new();
    for f in ranking {
        let col = column(&f.name);
        let clash = kept.iter().any(|k| pearson(col, column(k)).0.abs() > r_max);
        if !clash {
            kept.push(&f.name);
        }
    }
    kept.into_iter().map(String::from).collect()
}
