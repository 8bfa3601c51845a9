//! The county×hour feature matrix: column definitions, construction and CSV I/O.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use super::{
    build_targets, county_encoding, lookup_statics, make_lag, make_rolling, CountyStatic, FeatureConfig, IdwIndex, RollStat,
    TargetMode,
};
use crate::error::{Error, Result};
use crate::ingest::OutageHourlyGrid;
use crate::interp::InterpOutput;
use crate::io::{create_csv, fmt_f64, location, open_csv, parse_bool, parse_opt_f64};
use crate::spatial::Point;
use crate::time::{Hour, HourSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureSpec {
    Raw(String),
    Lag(String, usize),
    Rolling(String, usize, RollStat),
    /// IDW across neighbouring counties of another column.
    Idw(String),
    DayOfWeek,
    PopulationDensity,
    Lon,
    Lat,
    CountyEncoded,
}

impl FeatureSpec {
    pub fn name(&self) -> String {
        match self {
            FeatureSpec::Raw(p) => p.clone(),
            FeatureSpec::Lag(p, l) => format!("{p}_lag_{l}h"),
            FeatureSpec::Rolling(p, w, s) => format!("{p}_rolling_{}_{w}h", s.name()),
            FeatureSpec::Idw(base) => format!("IDW_{base}"),
            FeatureSpec::DayOfWeek => "day_of_week_num".into(),
            FeatureSpec::PopulationDensity => "population_density".into(),
            FeatureSpec::Lon => "x".into(),
            FeatureSpec::Lat => "y".into(),
            FeatureSpec::CountyEncoded => "county_encoded".into(),
        }
    }
}

const RAW: [&str; 14] = [
    "dwpf", "tmpf", "alti", "mslp", "gust", "p01i", "sknt", "drct_u", "drct_v", "relh", "relh_grad", "sq_flag", "ts_flag",
    "hr_flag",
];
const LAGGED: [&str; 4] = ["dwpf", "tmpf", "drct_u", "drct_v"];
const ROLLED: [(&str, RollStat); 10] = [
    ("p01i", RollStat::Sum),
    ("alti", RollStat::Mean),
    ("mslp", RollStat::Mean),
    ("relh", RollStat::Mean),
    ("gust", RollStat::Max),
    ("sknt", RollStat::Max),
    ("relh_grad", RollStat::Max),
    ("ts_flag", RollStat::Sum),
    ("hr_flag", RollStat::Sum),
    ("sq_flag", RollStat::Sum),
];
const IDW_BASES: [&str; 13] = [
    "alti",
    "dwpf",
    "drct_u",
    "drct_v",
    "tmpf_lag_6h",
    "drct_v_lag_6h",
    "drct_u_lag_12h",
    "dwpf_lag_12h",
    "relh_rolling_mean_48h",
    "gust_rolling_max_24h",
    "sknt_rolling_max_48h",
    "ts_flag_rolling_sum_12h",
    "p01i_rolling_sum_24h",
];

/// Column definitions in canonical order for the given lag and window sets.
pub fn feature_specs(lags: &[usize], windows: &[usize]) -> Vec<FeatureSpec> {
    let mut v: Vec<FeatureSpec> = RAW.iter().map(|p| FeatureSpec::Raw(p.to_string())).collect();
    for p in LAGGED {
        v.extend(lags.iter().map(|&l| FeatureSpec::Lag(p.to_string(), l)));
    }
    for (p, s) in ROLLED {
        v.extend(windows.iter().map(|&w| FeatureSpec::Rolling(p.to_string(), w, s)));
    }
    v.extend(IDW_BASES.iter().map(|b| FeatureSpec::Idw(b.to_string())));
    v.extend([
        FeatureSpec::DayOfWeek,
        FeatureSpec::PopulationDensity,
        FeatureSpec::Lon,
        FeatureSpec::Lat,
        FeatureSpec::CountyEncoded,
    ]);
    v
}

pub fn default_feature_names() -> Vec<String> {
    feature_specs(&[6, 12, 24, 48], &[6, 12, 24, 48]).iter().map(FeatureSpec::name).collect()
}

/// Dense matrix with NaN marking missing values. Rows are ordered by hour, then county.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub counties: Vec<String>,
    pub row_county: Vec<usize>,
    pub row_hour: Vec<Hour>,
    pub data: Vec<f64>,
    pub flag48: Vec<Option<bool>>,
    pub log_mag48: Vec<Option<f64>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.row_hour.len()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| self.column_index(n).ok_or_else(|| Error::Config(format!("unknown feature `{n}`"))))
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.data[i * self.width() + j]).collect()
    }

    /// Values of `cols` for row `i`, or `None` if any is missing.
    pub fn gather(&self, i: usize, cols: &[usize]) -> Option<Vec<f64>> {
        let row = self.row(i);
        let v: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
        v.iter().all(|x| x.is_finite()).then_some(v)
    }
}

/// Everything the builder reads. `centroids` are projected county centroids
/// aligned with `interp.counties`.
pub struct FeatureInputs<'a> {
    pub interp: &'a InterpOutput,
    pub outages: &'a OutageHourlyGrid,
    pub statics: &'a [CountyStatic],
    pub centroids: &'a [Point<f64>],
}

fn county_series(inp: &FeatureInputs<'_>, param: &str, c: usize) -> Result<Vec<Option<f64>>> {
    let field = inp
        .interp
        .fields
        .get(param)
        .ok_or_else(|| Error::Config(format!("interpolated parameter `{param}` not available")))?;
    Ok(field.county_series(c))
}

/// Builds features for every county and hour of the interpolation span and
/// attaches targets. `train` is the span whose outages fit the per-county
/// normaliser and threshold.
pub fn build_feature_matrix(inp: &FeatureInputs<'_>, cfg: &FeatureConfig, train: HourSpan) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let counties = inp.interp.counties.clone();
    let nc = counties.len();
    if inp.centroids.len() != nc {
        return Err(Error::Shape { expected: nc, got: inp.centroids.len() });
    }
    let statics = lookup_statics(inp.statics, &counties)?;
    let codes = county_encoding(&counties);
    let span = inp.interp.span;
    let nh = span.len;
    let specs = feature_specs(&cfg.lags, &cfg.windows);
    let names: Vec<String> = specs.iter().map(FeatureSpec::name).collect();
    let col_of: HashMap<&str, usize> = names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    for s in &specs {
        if let FeatureSpec::Idw(base) = s {
            if !col_of.contains_key(base.as_str()) {
                return Err(Error::Config(format!("IDW base column `{base}` is not produced by the lag/window settings")));
            }
        }
    }
    let w = names.len();

    // temporal and static columns, one county at a time
    let per_county: Vec<Vec<Vec<Option<f64>>>> = (0..nc)
        .into_par_iter()
        .map(|c| -> Result<Vec<Vec<Option<f64>>>> {
            let mut raw_cache: HashMap<&str, Vec<Option<f64>>> = HashMap::new();
            let mut cols = Vec::with_capacity(w);
            for s in &specs {
                let col = match s {
                    FeatureSpec::Raw(p) | FeatureSpec::Lag(p, _) | FeatureSpec::Rolling(p, _, _) => {
                        if !raw_cache.contains_key(p.as_str()) {
                            raw_cache.insert(p.as_str(), county_series(inp, p, c)?);
                        }
                        let base = &raw_cache[p.as_str()];
                        match s {
                            FeatureSpec::Raw(_) => base.clone(),
                            FeatureSpec::Lag(_, l) => make_lag(base, *l),
                            FeatureSpec::Rolling(_, win, st) => make_rolling(base, *win, *st),
                            _ => unreachable!(),
                        }
                    }
                    FeatureSpec::Idw(_) => Vec::new(),
                    FeatureSpec::DayOfWeek => span.iter().map(|h| Some(h.day_of_week() as f64)).collect(),
                    FeatureSpec::PopulationDensity => vec![Some(statics[c].population_density()); nh],
                    FeatureSpec::Lon => vec![Some(statics[c].lon); nh],
                    FeatureSpec::Lat => vec![Some(statics[c].lat); nh],
                    FeatureSpec::CountyEncoded => vec![Some(codes[&counties[c]] as f64); nh],
                };
                cols.push(col);
            }
            Ok(cols)
        })
        .collect::<Result<_>>()?;

    let mut data = vec![f64::NAN; nh * nc * w];
    for (c, cols) in per_county.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            for (h, v) in col.iter().enumerate() {
                data[(h * nc + c) * w + j] = v.unwrap_or(f64::NAN);
            }
        }
    }
    drop(per_county);

    // spatial aggregates read the same-hour values of their base column
    let index = IdwIndex::new(inp.centroids, true);
    let idw_cols: Vec<(usize, usize)> = specs
        .iter()
        .enumerate()
        .filter_map(|(j, s)| match s {
            FeatureSpec::Idw(b) => Some((j, col_of[b.as_str()])),
            _ => None,
        })
        .collect();
    data.par_chunks_mut(nc * w).for_each(|block| {
        for &(j, b) in &idw_cols {
            let vals: Vec<Option<f64>> = (0..nc).map(|c| Some(block[c * w + b]).filter(|v| v.is_finite())).collect();
            for (c, v) in index.aggregate(&vals, &cfg.idw).into_iter().enumerate() {
                block[c * w + j] = v.unwrap_or(f64::NAN);
            }
        }
    });

    // targets
    let outage_series: Vec<Vec<Option<f64>>> = counties
        .iter()
        .map(|id| {
            let k = inp.outages.county_index(id).ok_or_else(|| Error::MissingCounty(id.clone()))?;
            Ok(span
                .iter()
                .map(|h| inp.outages.span.index_of(h).and_then(|i| inp.outages.values[k][i]))
                .collect())
        })
        .collect::<Result<_>>()?;
    let train_lo = (train.start.0 - span.start.0).clamp(0, nh as i64) as usize;
    let train_hi = (train.end().0 - span.start.0).clamp(0, nh as i64) as usize;
    let targets: Vec<_> = outage_series
        .iter()
        .map(|s| build_targets(s, cfg.horizon, train_lo..train_hi))
        .collect();
    let state_log: Vec<Option<f64>> = (0..nh)
        .map(|h| {
            let t = h + cfg.horizon;
            if t >= nh {
                return None;
            }
            outage_series.iter().map(|s| s[t]).sum::<Option<f64>>().map(|y| y.max(0.0).ln_1p())
        })
        .collect();

    let mut row_county = Vec::with_capacity(nh * nc);
    let mut row_hour = Vec::with_capacity(nh * nc);
    let mut flag48 = Vec::with_capacity(nh * nc);
    let mut log_mag48 = Vec::with_capacity(nh * nc);
    for (h, hour) in span.iter().enumerate() {
        for c in 0..nc {
            row_county.push(c);
            row_hour.push(hour);
            flag48.push(targets[c].flag48[h]);
            log_mag48.push(match cfg.target_mode {
                TargetMode::County => targets[c].log_mag48[h],
                TargetMode::Summed => state_log[h],
            });
        }
    }
    Ok(FeatureMatrix { names, counties, row_county, row_hour, data, flag48, log_mag48 })
}

/// Writes `county_id,hour,<features>,flag48,log_mag48`.
pub fn write_features(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut w = create_csv(path)?;
    let mut header = vec!["county_id".to_string(), "hour".to_string()];
    header.extend(m.names.iter().cloned());
    header.push("flag48".into());
    header.push("log_mag48".into());
    w.write_record(&header)?;
    let mut rec: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..m.n_rows() {
        rec.clear();
        rec.push(m.counties[m.row_county[i]].clone());
        rec.push(m.row_hour[i].to_string());
        rec.extend(m.row(i).iter().map(|&v| if v.is_nan() { String::new() } else { fmt_f64(v) }));
        rec.push(m.flag48[i].map(|f| if f { "1" } else { "0" }.to_string()).unwrap_or_default());
        rec.push(m.log_mag48[i].map(fmt_f64).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let mut r = open_csv(path)?;
    let headers = r.headers()?.clone();
    let n = headers.len();
    if n < 4 || &headers[0] != "county_id" || &headers[1] != "hour" || &headers[n - 2] != "flag48" || &headers[n - 1] != "log_mag48" {
        return Err(Error::parse(path.display().to_string(), "unexpected feature matrix header"));
    }
    let names: Vec<String> = headers.iter().skip(2).take(n - 4).map(String::from).collect();
    let mut counties: Vec<String> = Vec::new();
    let mut county_idx: HashMap<String, usize> = HashMap::new();
    let mut m = FeatureMatrix {
        names,
        counties: Vec::new(),
        row_county: Vec::new(),
        row_hour: Vec::new(),
        data: Vec::new(),
        flag48: Vec::new(),
        log_mag48: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let id = &rec[0];
        let c = match county_idx.get(id) {
            Some(&c) => c,
            None => {
                counties.push(id.to_string());
                county_idx.insert(id.to_string(), counties.len() - 1);
                counties.len() - 1
            }
        };
        m.row_county.push(c);
        m.row_hour.push(Hour::parse(&rec[1]).map_err(|e| Error::parse(loc(), e.to_string()))?);
        for j in 2..n - 2 {
            m.data.push(parse_opt_f64(&rec[j], loc)?.unwrap_or(f64::NAN));
        }
        m.flag48.push(if rec[n - 2].is_empty() { None } else { Some(parse_bool(&rec[n - 2], loc)?) });
        m.log_mag48.push(parse_opt_f64(&rec[n - 1], loc)?);
    }
    m.counties = counties;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_columns() {
        let names = default_feature_names();
        assert_eq!(names.len(), 88);
        assert_eq!(names[0], "dwpf");
        assert_eq!(names[14], "dwpf_lag_6h");
        assert_eq!(names[30], "p01i_rolling_sum_6h");
        assert_eq!(names[70], "IDW_alti");
        assert_eq!(names[82], "IDW_p01i_rolling_sum_24h");
        assert_eq!(&names[83..], ["day_of_week_num", "population_density", "x", "y", "county_encoded"]);
        let uniq: std::collections::HashSet<_> = names.iter().collect();
        assert_eq!(uniq.len(), 88);
    }
}
