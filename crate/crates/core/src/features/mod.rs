//! Causal feature engineering, targets, sampling, scaling and screening.

mod idw;
mod matrix;
mod sampling;
mod scaler;
mod screening;
mod statics;
mod targets;
mod temporal;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use idw::{idw_aggregate, IdwConfig, IdwIndex};
pub use matrix::{
    build_feature_matrix, default_feature_names, feature_specs, read_features, write_features, FeatureInputs, FeatureMatrix,
    FeatureSpec,
};
pub use sampling::{in_event_window, tune_neg_keep, undersample_event_windows, LabelledRow};
pub use scaler::{fit_scaler, ScalerParams};
pub use screening::{collinearity_screen, pearson, pearson_rank, RankedFeature};
pub use statics::{
    county_encoding, lookup_statics, population_density, read_statics, write_statics, CountyStatic, STATICS_HEADER,
};
pub use targets::{build_targets, CountyTargets, TargetMode};
pub use temporal::{make_lag, make_rolling, RollStat};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub idw: IdwConfig,
    pub lags: Vec<usize>,
    pub windows: Vec<usize>,
    pub horizon: usize,
    pub event_window: i64,
    pub min_anoms: usize,
    /// Outside-window negative keep probability; `None` tunes it to `positive_share`.
    pub neg_keep: Option<f64>,
    pub positive_share: f64,
    pub r_max: f64,
    pub target_mode: TargetMode,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            idw: IdwConfig::default(),
            lags: vec![6, 12, 24, 48],
            windows: vec![6, 12, 24, 48],
            horizon: 48,
            event_window: 48,
            min_anoms: 3,
            neg_keep: None,
            positive_share: 0.34,
            r_max: 0.95,
            target_mode: TargetMode::County,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        self.idw.validate()?;
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be positive".into()));
        }
        if self.lags.iter().chain(&self.windows).any(|&x| x == 0) {
            return Err(Error::Config("lags and windows must be positive".into()));
        }
        if let Some(k) = self.neg_keep {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::Config(format!("neg_keep must lie in [0, 1], got {k}")));
            }
        }
        if !(self.positive_share > 0.0 && self.positive_share < 1.0) {
            return Err(Error::Config("positive_share must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.r_max) {
            return Err(Error::Config("r_max must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
