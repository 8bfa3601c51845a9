//! Stage-1 gate: L1 feature selection, class-weighted L2 fit and thresholding.

use serde::{Deserialize, Serialize};

use super::logistic::{average_precision, fit_l1_logistic_from, fit_l2_logistic, sigmoid, LogisticFit};
use super::Design;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticGate<T> {
    pub features: Vec<String>,
    pub weights: Vec<T>,
    pub intercept: T,
    pub c: T,
    pub class_weights: [T; 2],
    pub tau: T,
}

impl<T: Real> LogisticGate<T> {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() || self.features.len() != self.weights.len() {
            return Err(Error::InvalidInput("gate needs ≥ 1 feature and one weight per feature".into()));
        }
        if !(self.tau > T::zero() && self.tau < T::one()) {
            return Err(Error::InvalidInput(format!("gate threshold must lie in (0, 1), got {}", self.tau)));
        }
        Ok(())
    }

    pub fn probability(&self, x: &[T]) -> T {
        sigmoid(self.intercept + x.iter().zip(&self.weights).map(|(&a, &w)| a * w).sum::<T>())
    }
}

/// Forward-chained time-ordered folds: fold `i` trains on the first `i + 1`
/// of `k + 1` equal chunks and validates on the next one.
pub fn time_folds(n: usize, k: usize) -> Vec<(std::ops::Range<usize>, std::ops::Range<usize>)> {
    let chunk = n / (k + 1);
    (0..k)
        .map(|i| {
            let end = chunk * (i + 1);
            let val_end = if i + 1 == k { n } else { chunk * (i + 2) };
            (0..end, end..val_end)
        })
        .filter(|(tr, va)| !tr.is_empty() && !va.is_empty())
        .collect()
}

fn has_both(y: &[bool]) -> bool {
    y.iter().any(|&v| v) && y.iter().any(|&v| !v)
}

fn cv_score<T: Real>(x: &Design<T>, y: &[bool], folds: usize, fit: impl Fn(&Design<T>, &[bool]) -> Option<LogisticFit<T>>) -> T {
    let mut total = T::zero();
    let mut used = 0;
    for (tr, va) in time_folds(x.rows, folds) {
        if !has_both(&y[tr.clone()]) || !y[va.clone()].iter().any(|&v| v) {
            continue;
        }
        let tr_idx: Vec<usize> = tr.clone().collect();
        let va_idx: Vec<usize> = va.collect();
        let Some(f) = fit(&x.select_rows(&tr_idx), &y[tr]) else { continue };
        let scores: Vec<T> = va_idx.iter().map(|&i| f.decision(x.row(i))).collect();
        let labels: Vec<bool> = va_idx.iter().map(|&i| y[i]).collect();
        if let Some(ap) = average_precision(&scores, &labels) {
            total = total + ap;
            used += 1;
        }
    }
    if used == 0 {
        T::zero()
    } else {
        total / T::from_usize_lossy(used)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub target: usize,
    pub folds: usize,
    pub n_lambda: usize,
    pub max_iter: usize,
    pub bisection_steps: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig { target: 8, folds: 3, n_lambda: 10, max_iter: 2000, bisection_steps: 25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Column indices into the input design, ascending.
    pub columns: Vec<usize>,
    pub names: Vec<String>,
    pub lambda: f64,
    pub cv_ap: f64,
}

/// Smallest penalty at which every coefficient is zero.
pub fn lambda_max<T: Real>(x: &Design<T>, y: &[bool]) -> T {
    let n = T::from_usize_lossy(x.rows);
    let ybar = T::from_usize_lossy(y.iter().filter(|&&v| v).count()) / n;
    (0..x.cols)
        .map(|j| {
            (0..x.rows)
                .map(|i| x.row(i)[j] * ((if y[i] { T::one() } else { T::zero() }) - ybar))
                .sum::<T>()
                .abs()
                / n
        })
        .fold(T::zero(), T::max)
}

fn nonzero<T: Real>(f: &LogisticFit<T>) -> Vec<usize> {
    (0..f.weights.len()).filter(|&j| f.weights[j].abs() > T::lit(1e-8)).collect()
}

/// Drops a selected column when it duplicates (|r| ≈ 1) an earlier selected one.
fn dedupe<T: Real>(x: &Design<T>, cols: Vec<usize>) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for c in cols {
        let a = x.column(c);
        let dup = kept.iter().any(|&k| {
            let (r, _, degenerate) = crate::features::pearson(&a, &x.column(k));
            !degenerate && r.abs() >= T::one() - T::lit(1e-9)
        });
        if !dup {
            kept.push(c);
        }
    }
    kept
}

/// L1-logistic selection. The penalty is picked by forward-chained CV on
/// average precision over a log grid below `lambda_max`, then bisected
/// toward `cfg.target` non-zero coefficients.
pub fn fit_l1_selection<T: Real>(x: &Design<T>, y: &[bool], names: &[String], cfg: &SelectionConfig) -> Result<Selection> {
    if names.len() != x.cols {
        return Err(Error::Shape { expected: x.cols, got: names.len() });
    }
    if !has_both(y) {
        return Err(Error::InvalidInput("selection labels contain a single class".into()));
    }
    let lmax = lambda_max(x, y).max(T::lit(1e-12));
    let grid: Vec<T> = (0..cfg.n_lambda.max(1))
        .map(|k| lmax * T::lit(10f64.powf(-3.0 * (k as f64 + 1.0) / cfg.n_lambda.max(1) as f64)))
        .collect();
    // CV over the grid; each fold walks the path from large to small λ with warm starts
    let mut score = vec![T::zero(); grid.len()];
    let mut used = vec![0usize; grid.len()];
    for (tr, va) in time_folds(x.rows, cfg.folds) {
        if !has_both(&y[tr.clone()]) || !y[va.clone()].iter().any(|&v| v) {
            continue;
        }
        let tr_idx: Vec<usize> = tr.clone().collect();
        let xt = x.select_rows(&tr_idx);
        let labels = &y[va.clone()];
        let mut prev: Option<LogisticFit<T>> = None;
        for (k, &lam) in grid.iter().enumerate() {
            let Ok(f) = fit_l1_logistic_from(&xt, &y[tr.clone()], lam, cfg.max_iter, prev.as_ref()) else { continue };
            let scores: Vec<T> = va.clone().map(|i| f.decision(x.row(i))).collect();
            if let Some(ap) = average_precision(&scores, labels) {
                score[k] = score[k] + ap;
                used[k] += 1;
            }
            prev = Some(f);
        }
    }
    let mut best = (grid[0], T::neg_infinity());
    for (k, &lam) in grid.iter().enumerate() {
        let s = if used[k] == 0 { T::zero() } else { score[k] / T::from_usize_lossy(used[k]) };
        if s > best.1 {
            best = (lam, s);
        }
    }
    let (lam_cv, ap) = best;
    // full-data fits, each warm-started from the solved λ nearest in log space
    let mut solved: Vec<(T, LogisticFit<T>)> = Vec::new();
    let mut count_at = |lam: T| -> Result<(Vec<usize>, T)> {
        let init = solved
            .iter()
            .min_by(|a, b| (a.0 / lam).ln().abs().partial_cmp(&(b.0 / lam).ln().abs()).unwrap())
            .map(|s| s.1.clone());
        let f = fit_l1_logistic_from(x, y, lam, cfg.max_iter, init.as_ref())?;
        let cols = dedupe(x, nonzero(&f));
        solved.push((lam, f));
        Ok((cols, lam))
    };
    let mut candidates = vec![count_at(lam_cv)?];
    let n0 = candidates[0].0.len();
    if n0 != cfg.target {
        // log-space bisection between a dense and a sparse end
        let (mut lo, mut hi) = if n0 > cfg.target { (lam_cv, lmax) } else { (lam_cv * T::lit(1e-4), lam_cv) };
        for _ in 0..cfg.bisection_steps {
            if hi / lo < T::lit(1.0 + 1e-6) {
                break;
            }
            let mid = (lo * hi).sqrt();
            let c = count_at(mid)?;
            let n = c.0.len();
            candidates.push(c);
            if n == cfg.target {
                break;
            }
            if n > cfg.target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let pick = candidates
        .into_iter()
        .min_by(|a, b| {
            let da = (a.0.len() as i64 - cfg.target as i64).abs();
            let db = (b.0.len() as i64 - cfg.target as i64).abs();
            da.cmp(&db).then(b.1.partial_cmp(&a.1).unwrap())
        })
        .expect("at least one candidate");
    Ok(Selection {
        names: pick.0.iter().map(|&j| names[j].clone()).collect(),
        columns: pick.0,
        lambda: pick.1.as_f64(),
        cv_ap: ap.as_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateConfig {
    pub class_weights: [f64; 2],
    pub c_grid: Vec<f64>,
    pub tau: f64,
    pub folds: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            class_weights: [1.0, 5.0],
            c_grid: vec![1e-3, 1e-2, 1e-1, 1.0],
            tau: 0.70,
            folds: 3,
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

/// Fits the L2 gate on the selected columns, choosing `C` by forward-chained CV on average precision.
pub fn fit_l2_gate<T: Real>(x: &Design<T>, y: &[bool], names: &[String], cfg: &GateConfig) -> Result<LogisticGate<T>> {
    if names.len() != x.cols || names.is_empty() {
        return Err(Error::Shape { expected: x.cols.max(1), got: names.len() });
    }
    let cw = [T::lit(cfg.class_weights[0]), T::lit(cfg.class_weights[1])];
    let tol = T::lit(cfg.tol);
    let mut best: Option<(T, T)> = None;
    for &c in &cfg.c_grid {
        let c = T::lit(c);
        let s = cv_score(x, y, cfg.folds, |xt, yt| fit_l2_logistic(xt, yt, cw, c, tol, cfg.max_iter).ok());
        if best.is_none_or(|b| s > b.1) {
            best = Some((c, s));
        }
    }
    let c = best.map(|b| b.0).ok_or_else(|| Error::Config("empty C grid".into()))?;
    let fit = fit_l2_logistic(x, y, cw, c, tol, cfg.max_iter)?;
    let gate = LogisticGate {
        features: names.to_vec(),
        weights: fit.weights,
        intercept: fit.intercept,
        c,
        class_weights: cw,
        tau: T::lit(cfg.tau),
    };
    gate.validate()?;
    Ok(gate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDecision<T> {
    pub probability: Option<T>,
    pub pass: bool,
    pub reject_reason: Option<String>,
}

/// Scores rows holding the gate features in gate order. Rows with a missing
/// (non-finite) feature are rejected, do not pass, and count in the pass-rate denominator.
pub fn gate_predict<T: Real>(gate: &LogisticGate<T>, rows: &[Vec<T>]) -> (Vec<GateDecision<T>>, f64) {
    let decisions: Vec<GateDecision<T>> = rows
        .iter()
        .map(|r| {
            if r.len() != gate.features.len() {
                return GateDecision {
                    probability: None,
                    pass: false,
                    reject_reason: Some(format!("expected {} features, got {}", gate.features.len(), r.len())),
                };
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return GateDecision {
                    probability: None,
                    pass: false,
                    reject_reason: Some(format!("missing feature `{}`", gate.features[j])),
                };
            }
            let p = gate.probability(r);
            GateDecision { probability: Some(p), pass: p >= gate.tau, reject_reason: None }
        })
        .collect();
    let passed = decisions.iter().filter(|d| d.pass).count();
    let rate = if rows.is_empty() { 0.0 } else { passed as f64 / rows.len() as f64 };
    (decisions, rate)
}
