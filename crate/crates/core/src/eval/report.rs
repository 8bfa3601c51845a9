//! Assembles the evaluation report for the two-stage model and the baseline.

use serde::{Deserialize, Serialize};

use super::{
    block_bootstrap, classification_metrics, cmase, detect_events, event_prf, match_events, oe417_reconcile, overall_metrics,
    pr_curve_auc, seasonal_naive_mae, BootstrapConfig, BootstrapSummary, ClassificationMetrics, CmaseEntry, Confusion,
    DetectorConfig, Event, ExternalEvent, Oe417Row, OverallMetrics,
};
use crate::error::{Error, Result};
use crate::time::HourSpan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Every hour of the test span; hours without a prediction count as 0.
    #[default]
    All,
    /// Only hours where the model emitted a prediction.
    Available,
}

impl std::str::FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Scope::All),
            "available" => Ok(Scope::Available),
            _ => Err(Error::Config(format!("unknown scope `{s}` (expected all or available)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub threshold: f64,
    pub ma_k: usize,
    pub merge_gap: usize,
    pub season_lag: usize,
    pub deltas: Vec<usize>,
    pub omegas: Vec<usize>,
    pub bootstrap_replicates: usize,
    pub bootstrap_block: usize,
    pub bootstrap_seed: u64,
    pub redetect_predictions: bool,
    pub moran_permutations: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold: 50_000.0,
            ma_k: 5,
            merge_gap: 24,
            season_lag: 24,
            deltas: vec![0, 6, 12, 24, 36, 48],
            omegas: vec![6, 12, 24, 36, 48],
            bootstrap_replicates: 500,
            bootstrap_block: 168,
            bootstrap_seed: 2022,
            redetect_predictions: true,
            moran_permutations: 999,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold >= 0.0) || self.ma_k == 0 || self.season_lag == 0 {
            return Err(Error::Config("threshold must be ≥ 0 and ma_k, season_lag ≥ 1".into()));
        }
        if self.bootstrap_replicates == 0 || self.bootstrap_block == 0 {
            return Err(Error::Config("bootstrap replicates and block must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig { threshold: self.threshold, ma_k: self.ma_k, merge_gap: self.merge_gap }
    }

    pub fn bootstrap(&self) -> BootstrapConfig {
        BootstrapConfig {
            block: self.bootstrap_block,
            replicates: self.bootstrap_replicates,
            seed: self.bootstrap_seed,
            omegas: self.omegas.clone(),
            deltas: self.deltas.clone(),
            detector: self.detector(),
            season_lag: self.season_lag,
            redetect_predictions: self.redetect_predictions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub omega: usize,
    pub hits: usize,
    pub miss: usize,
    pub fa: usize,
    pub p: Option<f64>,
    pub r: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventsReport {
    pub reference: Vec<Event>,
    pub predicted: Vec<Event>,
    pub windows: Vec<WindowRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub availability: f64,
    pub overall: OverallMetrics,
    pub cmase_denominator: f64,
    pub cmase: Vec<CmaseEntry>,
    pub events: EventsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrSummary {
    pub aucpr: f64,
    pub roc_auc: f64,
    pub prevalence: f64,
    pub n_points: usize,
}

/// Gate decisions on the test county-hours.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    /// `None` for rows rejected for missing inputs.
    pub probability: Vec<Option<f64>>,
    pub pass: Vec<bool>,
    pub label: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scope: Scope,
    pub threshold: f64,
    pub span_start: String,
    pub hours: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion: Option<Confusion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pr: Option<PrSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_through: Option<f64>,
    #[serde(flatten)]
    pub two_stage: ModelReport,
    pub baseline: ModelReport,
    pub oe417: Vec<Oe417Row>,
}

/// State-level series on the target-hour axis.
pub struct SeriesSet<'a> {
    pub span: HourSpan,
    pub actual: &'a [f64],
    pub two_stage: &'a [f64],
    pub two_stage_available: &'a [bool],
    pub baseline: &'a [f64],
    pub baseline_available: &'a [bool],
}

fn masked(y: &[f64], m: &[bool]) -> Vec<f64> {
    y.iter().zip(m).map(|(&v, &a)| if a { v } else { 0.0 }).collect()
}

fn model_report(y: &[f64], yhat: &[f64], avail: &[bool], scope: Scope, cfg: &EvalConfig, with_bootstrap: bool) -> Result<ModelReport> {
    let mask = (scope == Scope::Available).then_some(avail);
    let pred = match mask {
        Some(m) => masked(yhat, m),
        None => yhat.to_vec(),
    };
    let mut overall = match mask {
        Some(m) => {
            let idx: Vec<usize> = (0..y.len()).filter(|&t| m[t]).collect();
            let ys: Vec<f64> = idx.iter().map(|&t| y[t]).collect();
            let ps: Vec<f64> = idx.iter().map(|&t| yhat[t]).collect();
            if idx.is_empty() {
                OverallMetrics { rmse: f64::NAN, mae: f64::NAN, r2: None, mase: None }
            } else {
                overall_metrics(&ys, &ps, cfg.season_lag)?
            }
        }
        None => overall_metrics(y, &pred, cfg.season_lag)?,
    };
    // MASE always uses the full-series seasonal-naive denominator
    let denom = seasonal_naive_mae(y, cfg.season_lag).filter(|d| *d > 0.0);
    overall.mase = denom.filter(|_| overall.mae.is_finite()).map(|d| overall.mae / d);
    let table = cmase(y, &pred, cfg.threshold, &cfg.deltas, cfg.season_lag, mask)?;
    let det = cfg.detector();
    let reference = detect_events(y, &det);
    let predicted = detect_events(&pred, &det);
    let windows = cfg
        .omegas
        .iter()
        .map(|&w| {
            let prf = event_prf(&match_events(&predicted.times(), &reference.times(), w));
            WindowRow { omega: w, hits: prf.hits, miss: prf.misses, fa: prf.false_alarms, p: prf.precision, r: prf.recall, f1: prf.f1 }
        })
        .collect();
    let bootstrap = if with_bootstrap && y.len() >= cfg.bootstrap_block {
        Some(block_bootstrap(y, yhat, mask, &cfg.bootstrap())?)
    } else {
        None
    };
    let availability = avail.iter().filter(|&&a| a).count() as f64 / avail.len().max(1) as f64;
    Ok(ModelReport {
        availability,
        overall,
        cmase_denominator: table.denominator,
        cmase: table.entries,
        events: EventsReport { reference: reference.events, predicted: predicted.events, windows },
        bootstrap,
    })
}

/// Builds the report. The bootstrap runs only when `with_bootstrap` is set
/// and the series is at least one block long.
pub fn evaluate(
    s: &SeriesSet<'_>,
    gate: Option<&GateOutcome>,
    external: &[ExternalEvent],
    scope: Scope,
    cfg: &EvalConfig,
    with_bootstrap: bool,
) -> Result<Report> {
    cfg.validate()?;
    let n = s.actual.len();
    if n != s.span.len || [s.two_stage.len(), s.baseline.len(), s.two_stage_available.len(), s.baseline_available.len()].iter().any(|&l| l != n) {
        return Err(Error::Shape { expected: s.span.len, got: n });
    }
    let two_stage = model_report(s.actual, s.two_stage, s.two_stage_available, scope, cfg, with_bootstrap)?;
    let baseline = model_report(s.actual, s.baseline, s.baseline_available, scope, cfg, with_bootstrap)?;
    let (mut confusion, mut classification, mut pr, mut pass_through) = (None, None, None, None);
    if let Some(g) = gate.filter(|g| !g.label.is_empty()) {
        let c = Confusion::from_predictions(&g.pass, &g.label);
        classification = Some(classification_metrics(&c)?);
        confusion = Some(c);
        pass_through = Some(g.pass.iter().filter(|&&p| p).count() as f64 / g.pass.len() as f64);
        let (scores, labels): (Vec<f64>, Vec<bool>) =
            g.probability.iter().zip(&g.label).filter_map(|(p, &l)| p.map(|p| (p, l))).unzip();
        pr = pr_curve_auc(&scores, &labels)
            .ok()
            .map(|c| PrSummary { aucpr: c.aucpr, roc_auc: c.roc_auc, prevalence: c.prevalence, n_points: c.points.len() });
    }
    Ok(Report {
        scope,
        threshold: cfg.threshold,
        span_start: s.span.start.to_string(),
        hours: n,
        confusion,
        classification,
        pr,
        pass_through,
        two_stage,
        baseline,
        oe417: oe417_reconcile(s.span, s.actual, external),
    })
}
