//! Per-parameter interpolation settings with the defaults used for the pipeline.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BinRule, Drift, KrigingConfig, KrigingMethod, OverdraftRule};
use crate::error::{Error, Result};

/// Parameters interpolated by kriging, in output order.
pub const KRIGED_PARAMETERS: [&str; 8] = ["tmpf", "dwpf", "relh", "alti", "mslp", "sknt", "drct_u", "drct_v"];
/// Parameters mapped by radius join (the gradient is computed at stations first).
pub const JOINED_PARAMETERS: [&str; 6] = ["gust", "p01i", "ts_flag", "sq_flag", "hr_flag", "relh_grad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMethod {
    Ordinary,
    Universal,
    Join,
    /// Station RH gradient followed by a radius join.
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamConfig {
    pub method: ParamMethod,
    pub maxlag_km: f64,
    pub n_lags: usize,
    pub bin_rule: BinRule,
    pub drift: Drift,
    pub overdraft_radius_km: Option<f64>,
    pub overdraft_upper: Option<f64>,
    pub overdraft_lower: Option<f64>,
    pub join_radius_km: f64,
    pub gradient_radius_km: f64,
    /// Physical bounds applied to kriged values.
    pub floor: Option<f64>,
    pub ceiling: Option<f64>,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig {
            method: ParamMethod::Ordinary,
            maxlag_km: 250.0,
            n_lags: 10,
            bin_rule: BinRule::Fixed,
            drift: Drift::None,
            overdraft_radius_km: None,
            overdraft_upper: None,
            overdraft_lower: None,
            join_radius_km: 100.0,
            gradient_radius_km: 100.0,
            floor: None,
            ceiling: None,
        }
    }
}

impl ParamConfig {
    pub fn kriging(&self) -> Result<KrigingConfig> {
        let method = match self.method {
            ParamMethod::Ordinary => KrigingMethod::Ordinary,
            ParamMethod::Universal => KrigingMethod::Universal,
            m => return Err(Error::Config(format!("{m:?} is not a kriging method"))),
        };
        let cfg = KrigingConfig {
            method,
            maxlag: self.maxlag_km * 1000.0,
            n_lags: self.n_lags,
            bin_rule: self.bin_rule,
            drift: self.drift,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn overdraft_rule(&self) -> Result<Option<OverdraftRule<f64>>> {
        match (self.overdraft_radius_km, self.overdraft_upper) {
            (None, None) if self.overdraft_lower.is_none() => Ok(None),
            (Some(r), Some(u)) => OverdraftRule::new(r * 1000.0, u, self.overdraft_lower)
                .map(Some)
                .map_err(|e| Error::Config(e.to_string())),
            _ => Err(Error::Config("overdraft needs both overdraft_radius_km and overdraft_upper".into())),
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let wrap = |e: Error| Error::Config(format!("[interp.{name}] {e}"));
        match self.method {
            ParamMethod::Ordinary | ParamMethod::Universal => {
                self.kriging().map_err(wrap)?;
            }
            ParamMethod::Join | ParamMethod::Gradient => {
                if !(self.join_radius_km > 0.0) || !(self.gradient_radius_km > 0.0) {
                    return Err(wrap(Error::Config("radii must be positive".into())));
                }
            }
        }
        self.overdraft_rule().map_err(wrap)?;
        Ok(())
    }
}

pub type ParamTable = BTreeMap<String, ParamConfig>;

/// Default settings for every interpolated parameter.
pub fn default_param_table() -> ParamTable {
    let uk = |maxlag_km: f64| ParamConfig {
        method: ParamMethod::Universal,
        maxlag_km,
        drift: Drift::RegionalLinear,
        ..ParamConfig::default()
    };
    let ok = |maxlag_km: f64| ParamConfig {
        method: ParamMethod::Ordinary,
        maxlag_km,
        ..ParamConfig::default()
    };
    let join = || ParamConfig {
        method: ParamMethod::Join,
        ..ParamConfig::default()
    };
    let mut t = ParamTable::new();
    t.insert("tmpf".into(), uk(250.0));
    t.insert("alti".into(), uk(250.0));
    t.insert("mslp".into(), ParamConfig { bin_rule: BinRule::Sturges, ..uk(250.0) });
    t.insert(
        "dwpf".into(),
        ParamConfig {
            overdraft_radius_km: Some(200.0),
            overdraft_upper: Some(69.8),
            overdraft_lower: Some(49.17),
            ..uk(250.0)
        },
    );
    t.insert("relh".into(), ParamConfig { floor: Some(0.0), ceiling: Some(100.0), ..ok(100.0) });
    t.insert(
        "sknt".into(),
        ParamConfig {
            n_lags: 15,
            bin_rule: BinRule::Fd,
            overdraft_radius_km: Some(100.0),
            overdraft_upper: Some(18.0),
            floor: Some(0.0),
            ..ok(100.0)
        },
    );
    t.insert("drct_u".into(), ParamConfig { n_lags: 7, ..ok(180.0) });
    t.insert("drct_v".into(), ParamConfig { n_lags: 7, ..ok(180.0) });
    for p in ["gust", "p01i", "ts_flag", "sq_flag", "hr_flag"] {
        t.insert(p.into(), join());
    }
    t.insert("relh_grad".into(), ParamConfig { method: ParamMethod::Gradient, ..ParamConfig::default() });
    t
}

/// Reads `[interp.*]` tables as overrides: a listed parameter starts from its
/// entry in [`default_param_table`] and unlisted parameters keep theirs.
pub fn deserialize_param_overrides<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ParamTable, D::Error> {
    use serde::de::Error as _;
    let overrides = BTreeMap::<String, toml::Table>::deserialize(d)?;
    let mut table = default_param_table();
    for (name, keys) in overrides {
        let base = table.get(&name).cloned().unwrap_or_default();
        let mut merged = match toml::Value::try_from(&base).map_err(D::Error::custom)? {
            toml::Value::Table(t) => t,
            _ => unreachable!("ParamConfig serialises to a table"),
        };
        merged.extend(keys);
        let p: ParamConfig = merged.try_into().map_err(|e| D::Error::custom(format!("[interp.{name}] {e}")))?;
        table.insert(name, p);
    }
    Ok(table)
}
