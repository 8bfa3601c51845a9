//! Season-wide interpolation of every configured parameter, parallel over hours.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    default_model, fit_empirical_variogram, fit_spherical_model, krige, overdraft, polygon_join, resolve_fallbacks,
    rh_gradient, usable_model, JoinEmpty, JOINED_PARAMETERS, KRIGED_PARAMETERS, ModelSource, Observation, ParamConfig, ParamMethod, ParamTable,
};
use crate::error::{Error, Result};
use crate::ingest::{StationHourly, StationMeta};
use crate::io::{columns, create_csv, fmt_bool, fmt_opt, location, open_csv, parse_bool, parse_opt_f64};
use crate::spatial::Point;
use crate::time::{Hour, HourSpan};

pub const KRIGED_HEADER: [&str; 6] = ["parameter", "hour", "county_id", "value", "variance", "overdrafted"];

/// One parameter over the season, indexed `[hour][county]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountyField {
    pub values: Vec<Vec<Option<f64>>>,
    pub variances: Vec<Vec<Option<f64>>>,
    pub overdrafted: Vec<Vec<bool>>,
}

impl CountyField {
    fn new(hours: usize, counties: usize) -> Self {
        CountyField {
            values: vec![vec![None; counties]; hours],
            variances: vec![vec![None; counties]; hours],
            overdrafted: vec![vec![false; counties]; hours],
        }
    }

    /// Time series of one county.
    pub fn county_series(&self, c: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|row| row[c]).collect()
    }
}

/// Per-parameter counters for hours and targets that needed special handling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamDiagnostics {
    pub fitted_hours: usize,
    pub previous_model_hours: usize,
    pub default_model_hours: usize,
    pub failed_hours: usize,
    pub regularized_targets: usize,
    pub clamped_targets: usize,
    pub overdrafted_targets: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpOutput {
    pub counties: Vec<String>,
    pub span: HourSpan,
    pub fields: BTreeMap<String, CountyField>,
    pub diagnostics: BTreeMap<String, ParamDiagnostics>,
}

/// One line of the long-form output table.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpRow {
    pub parameter: String,
    pub hour: Hour,
    pub county_id: String,
    pub value: Option<f64>,
    pub variance: Option<f64>,
    pub overdrafted: bool,
}

/// Station value for a parameter name; flags map to 0/1.
pub(crate) fn station_value(row: &StationHourly, parameter: &str) -> Option<f64> {
    let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });
    match parameter {
        "tmpf" => row.tmpf,
        "dwpf" => row.dwpf,
        "relh" => row.relh,
        "alti" => row.alti,
        "mslp" => row.mslp,
        "sknt" => row.sknt,
        "drct_u" => row.u,
        "drct_v" => row.v,
        "gust" => row.gust,
        "p01i" => row.p01i,
        "ts_flag" => flag(row.ts_flag),
        "sq_flag" => flag(row.sq_flag),
        "hr_flag" => flag(row.hr_flag),
        _ => None,
    }
}

type StationGrid<'a> = Vec<Vec<Option<&'a StationHourly>>>;

fn station_grid<'a>(stations: &[StationMeta], hourly: &'a [StationHourly], span: HourSpan) -> StationGrid<'a> {
    let idx: HashMap<&str, usize> = stations.iter().enumerate().map(|(i, s)| (s.station_id.as_str(), i)).collect();
    let mut grid = vec![vec![None; stations.len()]; span.len];
    for row in hourly {
        if let (Some(&s), Some(h)) = (idx.get(row.station_id.as_str()), span.index_of(row.hour)) {
            grid[h][s] = Some(row);
        }
    }
    grid
}

fn observations(grid_hour: &[Option<&StationHourly>], points: &[Point<f64>], parameter: &str) -> Vec<Observation<f64>> {
    grid_hour
        .iter()
        .zip(points)
        .filter_map(|(row, p)| row.and_then(|r| station_value(r, parameter)).map(|v| Observation::new(*p, v)))
        .collect()
}

fn kriged_parameter(
    name: &str,
    cfg: &ParamConfig,
    grid: &StationGrid<'_>,
    points: &[Point<f64>],
    targets: &[Point<f64>],
) -> Result<(CountyField, ParamDiagnostics)> {
    let kcfg = cfg.kriging()?;
    let rule = cfg.overdraft_rule()?;
    let obs: Vec<Vec<Observation<f64>>> = grid.par_iter().map(|g| observations(g, points, name)).collect();
    let fits: Vec<Result<_>> = obs
        .par_iter()
        .map(|o| fit_empirical_variogram(o, &kcfg).and_then(|ev| fit_spherical_model(&ev)))
        .collect();
    let models = resolve_fallbacks(fits, |h| default_model(&obs[h], kcfg.maxlag));
    let per_hour: Vec<_> = obs
        .par_iter()
        .zip(models.par_iter())
        .map(|(o, (m, _))| {
            if o.is_empty() {
                return None;
            }
            let field = krige(o, targets, &usable_model(*m), &kcfg).ok()?;
            Some(match &rule {
                Some(r) => overdraft(field, o, r),
                None => field,
            })
        })
        .collect();

    let mut out = CountyField::new(grid.len(), targets.len());
    let mut diag = ParamDiagnostics::default();
    for (h, ((_, source), field)) in models.iter().zip(per_hour).enumerate() {
        match source {
            ModelSource::Fitted => diag.fitted_hours += 1,
            ModelSource::PreviousHour => diag.previous_model_hours += 1,
            ModelSource::Default => diag.default_model_hours += 1,
        }
        let Some(field) = field else {
            diag.failed_hours += 1;
            continue;
        };
        for c in 0..targets.len() {
            let mut v = field.values[c];
            if let Some(x) = v {
                let lo = cfg.floor.unwrap_or(f64::NEG_INFINITY);
                let hi = cfg.ceiling.unwrap_or(f64::INFINITY);
                let y = x.clamp(lo, hi);
                if y != x {
                    diag.clamped_targets += 1;
                    v = Some(y);
                }
            }
            out.values[h][c] = v;
            out.variances[h][c] = field.variances[c];
            out.overdrafted[h][c] = field.overdrafted[c];
            diag.regularized_targets += usize::from(field.regularized[c]);
            diag.overdrafted_targets += usize::from(field.overdrafted[c]);
        }
    }
    Ok((out, diag))
}

fn joined_parameter(
    name: &str,
    cfg: &ParamConfig,
    grid: &StationGrid<'_>,
    points: &[Point<f64>],
    targets: &[Point<f64>],
) -> CountyField {
    let radius = cfg.join_radius_km * 1000.0;
    let empty = if name == "gust" { JoinEmpty::Missing } else { JoinEmpty::Zero };
    let values: Vec<Vec<Option<f64>>> = grid
        .par_iter()
        .map(|g| {
            let obs = if cfg.method == ParamMethod::Gradient {
                let relh = observations(g, points, "relh");
                let grad = rh_gradient(&relh, cfg.gradient_radius_km * 1000.0);
                relh.iter().zip(grad).map(|(o, d)| Observation::new(o.point, d)).collect()
            } else {
                observations(g, points, name)
            };
            polygon_join(&obs, targets, radius, empty)
        })
        .collect();
    let mut out = CountyField::new(grid.len(), targets.len());
    out.values = values;
    out
}

/// Interpolates every parameter in `table` to the county centroids for each
/// hour of `span`. Results do not depend on thread scheduling.
pub fn interpolate_season(
    stations: &[StationMeta],
    hourly: &[StationHourly],
    counties: &[(String, Point<f64>)],
    span: HourSpan,
    table: &ParamTable,
) -> Result<InterpOutput> {
    for (name, cfg) in table {
        cfg.validate(name)?;
        if !KRIGED_PARAMETERS.contains(&name.as_str()) && !JOINED_PARAMETERS.contains(&name.as_str()) {
            return Err(Error::Config(format!("unknown interpolation parameter `{name}`")));
        }
    }
    let grid = station_grid(stations, hourly, span);
    let points: Vec<Point<f64>> = stations.iter().map(|s| s.point()).collect();
    let targets: Vec<Point<f64>> = counties.iter().map(|c| c.1).collect();
    let mut fields = BTreeMap::new();
    let mut diagnostics = BTreeMap::new();
    for (name, cfg) in table {
        let (field, diag) = match cfg.method {
            ParamMethod::Ordinary | ParamMethod::Universal => kriged_parameter(name, cfg, &grid, &points, &targets)?,
            ParamMethod::Join | ParamMethod::Gradient => {
                (joined_parameter(name, cfg, &grid, &points, &targets), ParamDiagnostics::default())
            }
        };
        fields.insert(name.clone(), field);
        diagnostics.insert(name.clone(), diag);
    }
    Ok(InterpOutput {
        counties: counties.iter().map(|c| c.0.clone()).collect(),
        span,
        fields,
        diagnostics,
    })
}

pub fn write_kriged(path: &Path, out: &InterpOutput) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(KRIGED_HEADER)?;
    for (name, field) in &out.fields {
        for (h, hour) in out.span.iter().enumerate() {
            let hs = hour.to_string();
            for (c, county) in out.counties.iter().enumerate() {
                w.write_record([
                    name.as_str(),
                    hs.as_str(),
                    county.as_str(),
                    &fmt_opt(field.values[h][c]),
                    &fmt_opt(field.variances[h][c]),
                    fmt_bool(field.overdrafted[h][c]),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the long-form table back, using the given county order and span.
pub fn read_kriged(path: &Path, counties: &[String], span: HourSpan) -> Result<InterpOutput> {
    let mut r = open_csv(path)?;
    let headers = r.headers()?.clone();
    let col = columns(path, &headers, &KRIGED_HEADER)?;
    let cidx: HashMap<&str, usize> = counties.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut fields: BTreeMap<String, CountyField> = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let hour = Hour::parse(&rec[col[1]]).map_err(|e| Error::parse(loc(), e.to_string()))?;
        let Some(h) = span.index_of(hour) else { continue };
        let c = *cidx
            .get(&rec[col[2]])
            .ok_or_else(|| Error::MissingCounty(rec[col[2]].to_string()))?;
        let field = fields
            .entry(rec[col[0]].to_string())
            .or_insert_with(|| CountyField::new(span.len, counties.len()));
        field.values[h][c] = parse_opt_f64(&rec[col[3]], loc)?;
        field.variances[h][c] = parse_opt_f64(&rec[col[4]], loc)?;
        field.overdrafted[h][c] = parse_bool(&rec[col[5]], loc)?;
    }
    Ok(InterpOutput {
        counties: counties.to_vec(),
        span,
        fields,
        diagnostics: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::default_param_table;

    fn setup() -> (Vec<StationMeta>, Vec<StationHourly>, Vec<(String, Point<f64>)>, HourSpan) {
        let span = HourSpan::new(Hour(400_000), 3);
        let stations: Vec<StationMeta> = (0..6)
            .map(|i| StationMeta {
                station_id: format!("S{i}"),
                lon: 0.0,
                lat: 0.0,
                x: (i % 3) as f64 * 40_000.0,
                y: (i / 3) as f64 * 40_000.0,
            })
            .collect();
        let mut hourly = Vec::new();
        for h in span.iter() {
            for (i, s) in stations.iter().enumerate() {
                hourly.push(StationHourly {
                    station_id: s.station_id.clone(),
                    hour: h,
                    tmpf: Some(70.0 + i as f64),
                    dwpf: Some(if i == 0 { 75.0 } else { 60.0 }),
                    relh: Some(50.0 + 2.0 * i as f64),
                    alti: Some(29.9),
                    mslp: Some(1012.0),
                    sknt: Some(5.0),
                    u: Some(1.0),
                    v: Some(-1.0),
                    p01i: Some(0.0),
                    gust: None,
                    ts_flag: i == 4,
                    ..Default::default()
                });
            }
        }
        let counties = vec![("A".to_string(), Point::new(10_000.0, 10_000.0)), ("B".to_string(), Point::new(900_000.0, 0.0))];
        (stations, hourly, counties, span)
    }

    #[test]
    fn season_fields_and_round_trip() {
        let (stations, hourly, counties, span) = setup();
        let out = interpolate_season(&stations, &hourly, &counties, span, &default_param_table()).unwrap();
        let dw = &out.fields["dwpf"];
        assert_eq!(dw.values[0][0], Some(75.0));
        assert!(dw.overdrafted[0][0]);
        assert_eq!(dw.values[0][1], None);
        assert_eq!(out.fields["gust"].values[1][0], None);
        assert_eq!(out.fields["p01i"].values[1][1], Some(0.0));
        assert_eq!(out.fields["ts_flag"].values[2][0], Some(1.0));
        let a = out.fields["alti"].values[0][0].unwrap();
        assert!((a - 29.9).abs() < 1e-9);
        assert!(out.fields["relh_grad"].values[0][0].unwrap() > 0.0);

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("kriged.csv");
        write_kriged(&p, &out).unwrap();
        let back = read_kriged(&p, &out.counties, span).unwrap();
        assert_eq!(back.fields, out.fields);
    }

    #[test]
    fn unknown_parameter_rejected() {
        let (stations, hourly, counties, span) = setup();
        let mut t = default_param_table();
        t.insert("bogus".into(), ParamConfig::default());
        assert!(matches!(interpolate_season(&stations, &hourly, &counties, span, &t), Err(Error::Config(_))));
    }
}
