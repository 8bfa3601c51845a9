//! Station-to-centroid interpolation: variograms, kriging, overdrafting and joins.

mod engine;
mod holdout;
mod join;
mod kriging;
mod overdraft;
mod params;
mod variogram;

use serde::{Deserialize, Serialize};

use crate::spatial::Point;

pub use engine::{interpolate_season, read_kriged, write_kriged, CountyField, InterpOutput, InterpRow, KRIGED_HEADER};
pub use holdout::{holdout_validate, HoldoutResult};
pub use join::{polygon_join, rh_gradient, JoinEmpty};
pub use kriging::{krige, KrigedField};
pub use overdraft::{overdraft, OverdraftRule};
pub use params::{default_param_table, deserialize_param_overrides, ParamConfig, ParamMethod, ParamTable, JOINED_PARAMETERS, KRIGED_PARAMETERS};
pub use variogram::{
    default_model, fit_empirical_variogram, fit_spherical_model, resolve_fallbacks, usable_model, EmpiricalVariogram,
    ModelSource, SphericalModel,
};

/// One station value at one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T> {
    pub point: Point<T>,
    pub value: T,
}

impl<T> Observation<T> {
    pub fn new(point: Point<T>, value: T) -> Self {
        Observation { point, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KrigingMethod {
    Ordinary,
    Universal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinRule {
    Sturges,
    Fd,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drift {
    None,
    RegionalLinear,
}

/// Per-parameter kriging settings. `maxlag` is in meters and also bounds the
/// neighbourhood used for each prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrigingConfig {
    pub method: KrigingMethod,
    pub maxlag: f64,
    pub n_lags: usize,
    pub bin_rule: BinRule,
    pub drift: Drift,
}

impl KrigingConfig {
    pub fn ordinary(maxlag: f64) -> Self {
        KrigingConfig {
            method: KrigingMethod::Ordinary,
            maxlag,
            n_lags: 10,
            bin_rule: BinRule::Fixed,
            drift: Drift::None,
        }
    }

    pub fn universal(maxlag: f64) -> Self {
        KrigingConfig {
            method: KrigingMethod::Universal,
            drift: Drift::RegionalLinear,
            ..Self::ordinary(maxlag)
        }
    }

    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if !(self.maxlag > 0.0 && self.maxlag.is_finite()) {
            return Err(Error::Config(format!("maxlag must be positive, got {}", self.maxlag)));
        }
        if self.bin_rule == BinRule::Fixed && self.n_lags == 0 {
            return Err(Error::Config("fixed bin rule needs n_lags ≥ 1".into()));
        }
        if (self.method == KrigingMethod::Universal) != (self.drift == Drift::RegionalLinear) {
            return Err(Error::Config("universal kriging requires regional_linear drift (and only it)".into()));
        }
        Ok(())
    }
}
