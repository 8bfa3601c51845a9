//! Confusion-matrix metrics, precision-recall curve and ROC-AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn from_predictions(pred: &[bool], labels: &[bool]) -> Confusion {
        let mut c = Confusion::default();
        for (&p, &l) in pred.iter().zip(labels) {
            match (p, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    /// Absent when nothing is predicted positive.
    pub precision: Option<f64>,
    /// Absent when there are no positives.
    pub recall: Option<f64>,
    pub f1: f64,
    pub prevalence: f64,
}

pub fn classification_metrics(c: &Confusion) -> Result<ClassificationMetrics> {
    let n = c.total();
    if n == 0 {
        return Err(Error::InvalidInput("empty confusion matrix".into()));
    }
    let ratio = |a: u64, b: u64| (b > 0).then(|| a as f64 / b as f64);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if c.tp == 0 { 0.0 } else { 2.0 * c.tp as f64 / (2 * c.tp + c.fp + c.fn_) as f64 };
    Ok(ClassificationMetrics { precision, recall, f1, prevalence: (c.tp + c.fn_) as f64 / n as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub aucpr: f64,
    pub roc_auc: f64,
    pub prevalence: f64,
}

fn check_two_classes(labels: &[bool]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput("labels must contain both classes".into()));
    }
    Ok((pos, neg))
}

/// Mann-Whitney ROC-AUC with mid-ranks for tied scores.
pub fn roc_auc<T: Real>(scores: &[T], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), got: scores.len() });
    }
    let (pos, neg) = check_two_classes(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));
    let mut rank_sum = 0.0;
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && scores[idx[e + 1]] == scores[idx[k]] {
            e += 1;
        }
        let mid = (k + e) as f64 / 2.0 + 1.0;
        rank_sum += mid * idx[k..=e].iter().filter(|&&i| labels[i]).count() as f64;
        k = e + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Precision-recall points at every distinct score (descending), AUCPR by the
/// trapezoid rule over recall starting from (recall 0, precision 1), and ROC-AUC.
pub fn pr_curve_auc<T: Real>(scores: &[T], labels: &[bool]) -> Result<PrCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Shape { expected: labels.len(), got: scores.len() });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("scores must be finite".into()));
    }
    let (pos, _) = check_two_classes(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < idx.len() {
        let s = scores[idx[k]];
        while k < idx.len() && scores[idx[k]] == s {
            if labels[idx[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        points.push(PrPoint { threshold: s.as_f64(), precision: tp as f64 / (tp + fp) as f64, recall: tp as f64 / pos as f64 });
    }
    let mut aucpr = 0.0;
    let (mut r0, mut p0) = (0.0, 1.0);
    for p in &points {
        aucpr += (p.recall - r0) * (p.precision + p0) / 2.0;
        r0 = p.recall;
        p0 = p.precision;
    }
    Ok(PrCurve { points, aucpr, roc_auc: roc_auc(scores, labels)?, prevalence: pos as f64 / labels.len() as f64 })
}
