//! Two-stage training on a feature matrix and state-level prediction.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    fit_l1_selection, fit_l2_gate, gate_predict, train_regressor, Design, GateConfig, GateDecision, LogisticGate,
    RecurrentRegressor, SelectionConfig, TrainConfig, TrainReport,
};
use crate::error::{Error, Result};
use crate::features::{
    collinearity_screen, fit_scaler, pearson_rank, tune_neg_keep, undersample_event_windows, FeatureConfig, FeatureMatrix,
    LabelledRow, ScalerParams,
};
use crate::scalar::Real;
use crate::time::{Hour, HourSpan};

/// Regressor inputs (35 columns).
pub const REGRESSOR_FEATURES: [&str; 35] = [
    "dwpf",
    "tmpf",
    "relh",
    "alti",
    "mslp",
    "gust",
    "p01i",
    "sknt",
    "drct_u",
    "drct_v",
    "relh_grad",
    "ts_flag",
    "hr_flag",
    "dwpf_lag_6h",
    "dwpf_lag_12h",
    "dwpf_lag_24h",
    "dwpf_lag_48h",
    "gust_rolling_max_6h",
    "sknt_rolling_max_24h",
    "IDW_dwpf",
    "IDW_alti",
    "IDW_drct_u",
    "IDW_drct_v",
    "IDW_tmpf_lag_6h",
    "IDW_drct_v_lag_6h",
    "IDW_dwpf_lag_12h",
    "IDW_drct_u_lag_12h",
    "IDW_p01i_rolling_sum_24h",
    "IDW_gust_rolling_max_24h",
    "IDW_sknt_rolling_max_48h",
    "IDW_relh_rolling_mean_48h",
    "day_of_week_num",
    "population_density",
    "county_encoded",
    "y",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub selection: SelectionConfig,
    pub gate: GateConfig,
    pub train: TrainConfig,
    pub regressor_features: Vec<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            selection: SelectionConfig::default(),
            gate: GateConfig::default(),
            train: TrainConfig::default(),
            regressor_features: REGRESSOR_FEATURES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.regressor_features.is_empty() {
            return Err(Error::Config("regressor_features is empty".into()));
        }
        if self.selection.target == 0 || self.selection.folds == 0 {
            return Err(Error::Config("selection target and folds must be ≥ 1".into()));
        }
        if !(self.gate.tau > 0.0 && self.gate.tau < 1.0) {
            return Err(Error::Config(format!("gate tau must lie in (0, 1), got {}", self.gate.tau)));
        }
        if self.gate.c_grid.is_empty() || self.gate.c_grid.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::Config("gate c_grid must hold positive values".into()));
        }
        if self.gate.class_weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Config("gate class weights must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub n_train_rows: usize,
    pub candidates: Vec<String>,
    pub neg_keep: f64,
    pub n_gate_rows: usize,
    pub gate_positive_share: f64,
    pub selection_lambda: f64,
    pub selection_cv_ap: f64,
    pub gate_train_pass_rate: f64,
    pub regressor: TrainReport,
    pub baseline: TrainReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageModel {
    /// Columns the scaler was fitted on, in feature-matrix order.
    pub features: Vec<String>,
    pub scaler: ScalerParams,
    pub gate: LogisticGate<f64>,
    pub regressor: RecurrentRegressor<f64>,
    pub baseline: RecurrentRegressor<f64>,
    pub horizon: usize,
    pub seed: u64,
    pub config: ModelConfig,
    pub summary: TrainSummary,
}

/// Rows whose hour and target hour both lie inside `train`.
pub fn train_rows(m: &FeatureMatrix, train: HourSpan, horizon: usize) -> Vec<usize> {
    (0..m.n_rows())
        .filter(|&i| {
            let t = m.row_hour[i];
            train.index_of(t).is_some() && train.index_of(Hour(t.0 + horizon as i64)).is_some() && m.flag48[i].is_some()
        })
        .collect()
}

fn scaled(m: &FeatureMatrix, scaler: &ScalerParams, i: usize, cols: &[usize]) -> Option<Vec<f64>> {
    m.gather(i, cols).map(|v| v.iter().zip(cols).map(|(&x, &j)| scaler.scale_one(j, x)).collect())
}

fn design(m: &FeatureMatrix, scaler: &ScalerParams, rows: &[usize], cols: &[usize]) -> Result<Design<f64>> {
    let mut data = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        data.extend(scaled(m, scaler, i, cols).ok_or_else(|| Error::InvalidInput(format!("row {i} has missing inputs")))?);
    }
    Design::new(rows.len(), cols.len(), data)
}

fn complete(m: &FeatureMatrix, rows: &[usize], cols: &[usize]) -> Vec<usize> {
    rows.iter().copied().filter(|&i| cols.iter().all(|&j| m.row(i)[j].is_finite())).collect()
}

/// Fits scaler, gate candidates, L1 selection, L2 gate, the gated regressor
/// and the ungated baseline on the rows of `train`.
pub fn train_two_stage(m: &FeatureMatrix, train: HourSpan, fcfg: &FeatureConfig, mcfg: &ModelConfig, seed: u64) -> Result<TwoStageModel> {
    fcfg.validate()?;
    mcfg.validate()?;
    let horizon = fcfg.horizon;
    let rows = train_rows(m, train, horizon);
    if rows.is_empty() {
        return Err(Error::InvalidInput("no labelled rows inside the train span".into()));
    }
    let scaler = fit_scaler(rows.iter().map(|&i| m.row(i)), m.width())?;

    // candidate gate features: correlation ranking then collinearity screen
    let target: Vec<f64> = rows.iter().map(|&i| if m.flag48[i] == Some(true) { 1.0 } else { 0.0 }).collect();
    let columns: Vec<Vec<f64>> = (0..m.width())
        .into_par_iter()
        .map(|j| rows.iter().map(|&i| m.row(i)[j]).collect())
        .collect();
    let ranking: Vec<_> = pearson_rank(&m.names, &columns, &target).into_iter().filter(|f| !f.degenerate).collect();
    let candidates = collinearity_screen(&ranking, |n| columns[m.column_index(n).expect("ranked name")].as_slice(), fcfg.r_max);
    if candidates.is_empty() {
        return Err(Error::Degenerate("no non-constant feature to select from".into()));
    }
    let cand_cols = m.column_indices(&candidates)?;

    // event-window undersampling of the classifier rows
    let gate_pool = complete(m, &rows, &cand_cols);
    let labelled: Vec<LabelledRow> = gate_pool
        .iter()
        .map(|&i| LabelledRow { county: m.row_county[i], hour: m.row_hour[i].0, flag: m.flag48[i] == Some(true) })
        .collect();
    let neg_keep = match fcfg.neg_keep {
        Some(k) => k,
        None => tune_neg_keep(&labelled, fcfg.event_window, fcfg.min_anoms, fcfg.positive_share),
    };
    let kept = undersample_event_windows(&labelled, fcfg.event_window, fcfg.min_anoms, neg_keep, seed);
    let gate_rows: Vec<usize> = kept.iter().map(|&k| gate_pool[k]).collect();
    let y_gate: Vec<bool> = kept.iter().map(|&k| labelled[k].flag).collect();
    let n_pos = y_gate.iter().filter(|&&v| v).count();
    if n_pos == 0 || n_pos == y_gate.len() {
        return Err(Error::Degenerate("gate training rows hold a single class".into()));
    }

    let x_cand = design(m, &scaler, &gate_rows, &cand_cols)?;
    let sel = fit_l1_selection(&x_cand, &y_gate, &candidates, &mcfg.selection)?;
    if sel.columns.is_empty() {
        return Err(Error::Degenerate("L1 selection kept no feature".into()));
    }
    let gate = fit_l2_gate(&x_cand.select_cols(&sel.columns), &y_gate, &sel.names, &mcfg.gate)?;

    // regressor rows: gate-passed (two-stage) or all (baseline)
    let reg_cols = m.column_indices(&mcfg.regressor_features)?;
    let gate_cols = m.column_indices(&gate.features)?;
    let gate_inputs: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| scaled(m, &scaler, i, &gate_cols).unwrap_or_else(|| vec![f64::NAN; gate_cols.len()]))
        .collect();
    let (decisions, gate_rate) = gate_predict(&gate, &gate_inputs);
    let with_target: Vec<usize> = complete(m, &rows, &reg_cols).into_iter().filter(|&i| m.log_mag48[i].is_some()).collect();
    let passed: std::collections::HashSet<usize> =
        rows.iter().zip(&decisions).filter(|(_, d)| d.pass).map(|(&i, _)| i).collect();
    let reg_rows: Vec<usize> = with_target.iter().copied().filter(|i| passed.contains(i)).collect();

    let tcfg = TrainConfig { seed, ..mcfg.train.clone() };
    let fit = |rs: &[usize]| -> Result<(RecurrentRegressor<f64>, TrainReport)> {
        let x = design(m, &scaler, rs, &reg_cols)?;
        let y: Vec<f64> = rs.iter().map(|&i| m.log_mag48[i].expect("filtered")).collect();
        train_regressor(&x, &y, &mcfg.regressor_features, &tcfg)
    };
    let (regressor, reg_report) = fit(&reg_rows)?;
    let (baseline, base_report) = fit(&with_target)?;

    Ok(TwoStageModel {
        features: m.names.clone(),
        scaler,
        gate,
        regressor,
        baseline,
        horizon,
        seed,
        config: mcfg.clone(),
        summary: TrainSummary {
            n_train_rows: rows.len(),
            candidates,
            neg_keep,
            n_gate_rows: gate_rows.len(),
            gate_positive_share: n_pos as f64 / y_gate.len() as f64,
            selection_lambda: sel.lambda,
            selection_cv_ap: sel.cv_ap,
            gate_train_pass_rate: gate_rate,
            regressor: reg_report,
            baseline: base_report,
        },
    })
}

/// Hourly state-level prediction on the target-hour axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSeries {
    pub span: HourSpan,
    pub yhat: Vec<f64>,
    pub available: Vec<bool>,
}

impl StateSeries {
    pub fn availability(&self) -> f64 {
        if self.span.len == 0 {
            0.0
        } else {
            self.available.iter().filter(|&&a| a).count() as f64 / self.span.len as f64
        }
    }
}

/// Inverts log-scale county predictions (`expm1`, clamped at 0), moves each
/// to `t + horizon` and sums per hour. Hours receiving no prediction stay at
/// 0 and are unavailable; predictions landing outside `span` are dropped.
pub fn predict_state_series<T: Real>(span: HourSpan, horizon: usize, preds: &[(Hour, T)]) -> StateSeries {
    let mut yhat = vec![0.0; span.len];
    let mut available = vec![false; span.len];
    for &(t, lp) in preds {
        if let Some(k) = span.index_of(Hour(t.0 + horizon as i64)) {
            let v = lp.as_f64().exp_m1();
            yhat[k] += if v.is_finite() { v.max(0.0) } else { 0.0 };
            available[k] = true;
        }
    }
    StateSeries { span, yhat, available }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowPrediction {
    pub row: usize,
    pub gate: GateDecision<f64>,
    /// Log-scale regressor output on gate-passed rows.
    pub two_stage: Option<f64>,
    pub baseline: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub rows: Vec<RowPrediction>,
    pub two_stage: StateSeries,
    pub baseline: StateSeries,
    pub pass_rate: f64,
}

impl TwoStageModel {
    fn resolve(&self, m: &FeatureMatrix, names: &[String]) -> Result<Vec<usize>> {
        if m.names != self.features {
            return Err(Error::Config("feature matrix columns differ from those the model was trained on".into()));
        }
        m.column_indices(names)
    }

    /// Gate and both regressors on `rows`; the state series cover `out_span`
    /// (target hours).
    pub fn forecast(&self, m: &FeatureMatrix, rows: &[usize], out_span: HourSpan) -> Result<Forecast> {
        let gate_cols = self.resolve(m, &self.gate.features)?;
        let reg_cols = self.resolve(m, &self.regressor.features)?;
        let base_cols = self.resolve(m, &self.baseline.features)?;
        let inputs: Vec<Vec<f64>> = rows
            .iter()
            .map(|&i| {
                let raw: Vec<f64> = gate_cols.iter().map(|&j| m.row(i)[j]).collect();
                raw.iter().zip(&gate_cols).map(|(&x, &j)| self.scaler.scale_one(j, x)).collect()
            })
            .collect();
        let (decisions, pass_rate) = gate_predict(&self.gate, &inputs);
        let out: Vec<RowPrediction> = rows
            .par_iter()
            .zip(decisions)
            .map(|(&i, gate)| -> Result<RowPrediction> {
                let run = |reg: &RecurrentRegressor<f64>, cols: &[usize]| -> Result<Option<f64>> {
                    match scaled(m, &self.scaler, i, cols) {
                        Some(x) => Ok(Some(super::cell_forward(&reg.params, &x)?)),
                        None => Ok(None),
                    }
                };
                let two_stage = if gate.pass { run(&self.regressor, &reg_cols)? } else { None };
                let baseline = run(&self.baseline, &base_cols)?;
                Ok(RowPrediction { row: i, gate, two_stage, baseline })
            })
            .collect::<Result<_>>()?;
        let series = |f: &dyn Fn(&RowPrediction) -> Option<f64>| {
            let preds: Vec<(Hour, f64)> = out.iter().filter_map(|r| f(r).map(|p| (m.row_hour[r.row], p))).collect();
            predict_state_series(out_span, self.horizon, &preds)
        };
        let two_stage = series(&|r| r.two_stage);
        let baseline = series(&|r| r.baseline);
        Ok(Forecast { rows: out, two_stage, baseline, pass_rate })
    }
}

/// Rows whose hour lies in `hours` (half-open index range over `span`).
pub fn rows_in(m: &FeatureMatrix, span: HourSpan, hours: Range<usize>) -> Vec<usize> {
    (0..m.n_rows())
        .filter(|&i| span.index_of(m.row_hour[i]).is_some_and(|k| hours.contains(&k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_series_examples() {
        let span = HourSpan { start: Hour(48), len: 4 };
        let s = predict_state_series(span, 48, &[(Hour(0), 101f64.ln())]);
        assert!((s.yhat[0] - 100.0).abs() < 1e-9);
        assert_eq!(s.available, vec![true, false, false, false]);
        let s = predict_state_series(span, 48, &[(Hour(1), 101f64.ln()), (Hour(1), 51f64.ln())]);
        assert!((s.yhat[1] - 150.0).abs() < 1e-9);
        let s = predict_state_series::<f64>(span, 48, &[]);
        assert!(s.available.iter().all(|a| !a));
        let s = predict_state_series(span, 48, &[(Hour(2), -3.0)]);
        assert_eq!(s.yhat[2], 0.0);
    }

    #[test]
    fn regressor_list_is_35_distinct_known_columns() {
        let names = crate::features::default_feature_names();
        let set: std::collections::HashSet<_> = REGRESSOR_FEATURES.iter().collect();
        assert_eq!(set.len(), 35);
        for f in REGRESSOR_FEATURES {
            assert!(names.iter().any(|n| n == f), "{f}");
        }
    }
}
