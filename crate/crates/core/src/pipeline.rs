//! Pipeline stages. Each stage reads the artifacts of its predecessors from
//! the output directory and writes its own.
//!
//! | stage     | writes                                                    |
//! |-----------|-----------------------------------------------------------|
//! | synth     | input CSVs, `synthetic_truth.json`, `stormwarn.toml`     |
//! | ingest    | `outage_hourly.csv`, `station_hourly.csv`                 |
//! | interp    | `kriged.csv`, `interp_diagnostics.json`                   |
//! | features  | `features.csv`                                            |
//! | train     | `model.bin`, `train_summary.json`                         |
//! | predict   | `predictions.csv`, `state_series.csv`                     |
//! | eval      | `eval.json`                                               |
//! | bootstrap | `bootstrap.json`                                          |
//! | report    | `report.json`, `figure.svg`, `figure.csv`                 |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::eval::{
    acf, block_bootstrap, evaluate, morans_i, read_adjacency, read_external_events, BootstrapSummary, GateOutcome, MoranResult,
    Report, Scope, SeriesSet, DEFAULT_ACF_LAGS,
};
use crate::features::{build_feature_matrix, read_features, read_statics, write_features, CountyStatic, FeatureInputs, FeatureMatrix};
use crate::ingest::io::{
    read_outage_hourly, read_outages, read_station_hourly, read_stations, read_weather, write_outage_hourly, write_station_hourly,
};
use crate::ingest::{aggregate_max_concurrency, project_stations, resample_weather_hourly, StationMeta, DEFAULT_MAX_GAP_HOURS};
use crate::interp::{interpolate_season, read_kriged, write_kriged};
use crate::io::{columns, create_csv, fmt_bool, fmt_f64, fmt_opt, location, open_csv, parse_bool, parse_f64, parse_opt_f64, write_json};
use crate::model::{read_bundle, rows_in, train_two_stage, write_bundle, Forecast};
use crate::spatial::{LocalProjection, Point};
use crate::synth::{generate_synthetic, SyntheticFiles};
use crate::time::{Hour, HourSpan};

pub const CONFIG_FILE: &str = "stormwarn.toml";
pub const STATE_SERIES_HEADER: [&str; 6] = ["hour", "actual", "two_stage", "two_stage_available", "baseline", "baseline_available"];
pub const PREDICTIONS_HEADER: [&str; 10] = [
    "county_id",
    "hour",
    "target_hour",
    "probability",
    "pass",
    "reject_reason",
    "label",
    "target_log",
    "two_stage_log",
    "baseline_log",
];

/// Artifact locations inside an output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub dir: PathBuf,
}

impl Artifacts {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Artifacts { dir: dir.into() }
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn outage_hourly(&self) -> PathBuf {
        self.file("outage_hourly.csv")
    }
    pub fn station_hourly(&self) -> PathBuf {
        self.file("station_hourly.csv")
    }
    pub fn kriged(&self) -> PathBuf {
        self.file("kriged.csv")
    }
    pub fn interp_diagnostics(&self) -> PathBuf {
        self.file("interp_diagnostics.json")
    }
    pub fn features(&self) -> PathBuf {
        self.file("features.csv")
    }
    pub fn model(&self) -> PathBuf {
        self.file("model.bin")
    }
    pub fn train_summary(&self) -> PathBuf {
        self.file("train_summary.json")
    }
    pub fn predictions(&self) -> PathBuf {
        self.file("predictions.csv")
    }
    pub fn state_series(&self) -> PathBuf {
        self.file("state_series.csv")
    }
    pub fn eval(&self) -> PathBuf {
        self.file("eval.json")
    }
    pub fn bootstrap(&self) -> PathBuf {
        self.file("bootstrap.json")
    }
    pub fn report(&self) -> PathBuf {
        self.file("report.json")
    }
    pub fn figure_svg(&self) -> PathBuf {
        self.file("figure.svg")
    }
    pub fn figure_csv(&self) -> PathBuf {
        self.file("figure.csv")
    }
}

/// Fails with [`Error::MissingArtifact`] naming `path` when it does not exist.
pub fn require(path: &Path) -> Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact(path.to_path_buf()))
    }
}

fn input(cfg: &PipelineConfig, p: &Path) -> Result<PathBuf> {
    let path = cfg.resolve(p);
    require(&path)?;
    Ok(path)
}

/// Writes the synthetic inputs and a matching config into `out`; returns the config path.
pub fn synth(cfg: &PipelineConfig, out: &Path) -> Result<PathBuf> {
    let files = generate_synthetic(&cfg.synthetic, out)?;
    let mut run = PipelineConfig::for_synthetic(&cfg.synthetic)?;
    run.seed = cfg.seed;
    run.interp = cfg.interp.clone();
    run.features = cfg.features.clone();
    run.features.horizon = run.horizon;
    run.model = cfg.model.clone();
    run.eval = cfg.eval.clone();
    let name = |p: &Path| PathBuf::from(p.file_name().expect("synthetic file name"));
    let SyntheticFiles { outages, weather, stations, statics, adjacency, external_events, .. } = files;
    run.paths.outages = name(&outages);
    run.paths.weather = name(&weather);
    run.paths.stations = name(&stations);
    run.paths.statics = name(&statics);
    run.paths.adjacency = name(&adjacency);
    run.paths.external_events = name(&external_events);
    run.validate()?;
    let path = out.join(CONFIG_FILE);
    run.save(&path)?;
    Ok(path)
}

pub fn ingest(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let art = Artifacts::new(out);
    std::fs::create_dir_all(out)?;
    let season = cfg.season_span()?;
    let records = read_outages(&input(cfg, &cfg.paths.outages)?)?;
    let mut grid = aggregate_max_concurrency(&records)?;
    grid.fill_short_gaps(DEFAULT_MAX_GAP_HOURS);
    write_outage_hourly(&art.outage_hourly(), &grid)?;
    let stations = read_stations(&input(cfg, &cfg.paths.stations)?)?;
    let ids: Vec<String> = stations.iter().map(|s| s.0.clone()).collect();
    let weather = read_weather(&input(cfg, &cfg.paths.weather)?)?;
    let hourly = resample_weather_hourly(&weather, &ids, season);
    write_station_hourly(&art.station_hourly(), &hourly)?;
    Ok(())
}

/// Statics plus projected county centroids and stations, all in the
/// projection centred on the counties.
pub struct Geometry {
    pub statics: Vec<CountyStatic>,
    pub counties: Vec<(String, Point<f64>)>,
    pub stations: Vec<StationMeta>,
}

pub fn geometry(cfg: &PipelineConfig) -> Result<Geometry> {
    let statics = read_statics(&input(cfg, &cfg.paths.statics)?)?;
    if statics.is_empty() {
        return Err(Error::InvalidInput("static county table is empty".into()));
    }
    let proj = LocalProjection::about_centroid(&statics.iter().map(|s| (s.lon, s.lat)).collect::<Vec<_>>());
    let counties = statics.iter().map(|s| (s.county_id.clone(), proj.project(s.lon, s.lat))).collect();
    let stations = project_stations(&read_stations(&input(cfg, &cfg.paths.stations)?)?, &proj)?;
    Ok(Geometry { statics, counties, stations })
}

pub fn interp(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let art = Artifacts::new(out);
    let hourly = read_station_hourly(require(&art.station_hourly())?)?;
    let geo = geometry(cfg)?;
    let result = interpolate_season(&geo.stations, &hourly, &geo.counties, cfg.season_span()?, &cfg.interp)?;
    write_kriged(&art.kriged(), &result)?;
    write_json(&art.interp_diagnostics(), &result.diagnostics)?;
    Ok(())
}

pub fn features(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let art = Artifacts::new(out);
    let geo = geometry(cfg)?;
    let ids: Vec<String> = geo.counties.iter().map(|c| c.0.clone()).collect();
    let kriged = read_kriged(require(&art.kriged())?, &ids, cfg.season_span()?)?;
    let outages = read_outage_hourly(require(&art.outage_hourly())?)?;
    let centroids: Vec<Point<f64>> = geo.counties.iter().map(|c| c.1).collect();
    let inputs = FeatureInputs { interp: &kriged, outages: &outages, statics: &geo.statics, centroids: &centroids };
    let m = build_feature_matrix(&inputs, &cfg.features, cfg.train_span()?)?;
    write_features(&art.features(), &m)?;
    Ok(())
}

pub fn train(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    let art = Artifacts::new(out);
    let m = read_features(require(&art.features())?)?;
    let model = train_two_stage(&m, cfg.train_span()?, &cfg.features, &cfg.model, cfg.seed)?;
    write_bundle(&art.model(), &model)?;
    write_json(&art.train_summary(), &model.summary)?;
    Ok(())
}

/// Rows whose target hour falls in the test span.
pub fn test_rows(cfg: &PipelineConfig, m: &FeatureMatrix) -> Result<Vec<usize>> {
    let season = cfg.season_span()?;
    let test = cfg.test_span()?;
    let lo = (test.start.0 - cfg.horizon as i64 - season.start.0).max(0) as usize;
    let hi = (test.end().0 - cfg.horizon as i64 - season.start.0).max(0) as usize;
    Ok(rows_in(m, season, lo..hi))
}

pub fn predict(cfg: &PipelineConfig, out: &Path) -> Result<Forecast> {
    let art = Artifacts::new(out);
    let model = read_bundle(require(&art.model())?)?;
    let m = read_features(require(&art.features())?)?;
    let outages = read_outage_hourly(require(&art.outage_hourly())?)?;
    let test = cfg.test_span()?;
    let rows = test_rows(cfg, &m)?;
    let fc = model.forecast(&m, &rows, test)?;
    write_predictions(&art.predictions(), &m, &fc, model.horizon)?;
    let state = outages.state_series();
    let actual: Vec<f64> = test
        .iter()
        .map(|h| outages.span.index_of(h).and_then(|i| state[i]).unwrap_or(0.0))
        .collect();
    let series = StateSeriesFile {
        span: test,
        actual,
        two_stage: fc.two_stage.yhat.clone(),
        two_stage_available: fc.two_stage.available.clone(),
        baseline: fc.baseline.yhat.clone(),
        baseline_available: fc.baseline.available.clone(),
    };
    write_state_series(&art.state_series(), &series)?;
    Ok(fc)
}

fn write_predictions(path: &Path, m: &FeatureMatrix, fc: &Forecast, horizon: usize) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(PREDICTIONS_HEADER)?;
    for r in &fc.rows {
        let hour = m.row_hour[r.row];
        w.write_record([
            m.counties[m.row_county[r.row]].clone(),
            hour.to_string(),
            hour.offset(horizon as i64).to_string(),
            fmt_opt(r.gate.probability),
            fmt_bool(r.gate.pass).to_string(),
            r.gate.reject_reason.clone().unwrap_or_default(),
            m.flag48[r.row].map(|b| fmt_bool(b).to_string()).unwrap_or_default(),
            fmt_opt(m.log_mag48[r.row]),
            fmt_opt(r.two_stage),
            fmt_opt(r.baseline),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Gate outcome over prediction rows that carry a label.
pub fn read_gate_outcome(path: &Path) -> Result<GateOutcome> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &PREDICTIONS_HEADER)?;
    let mut g = GateOutcome { probability: Vec::new(), pass: Vec::new(), label: Vec::new() };
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        if rec[c[6]].is_empty() {
            continue;
        }
        g.probability.push(parse_opt_f64(&rec[c[3]], loc)?);
        g.pass.push(parse_bool(&rec[c[4]], loc)?);
        g.label.push(parse_bool(&rec[c[6]], loc)?);
    }
    Ok(g)
}

/// Hourly state-level series on the test span.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeriesFile {
    pub span: HourSpan,
    pub actual: Vec<f64>,
    pub two_stage: Vec<f64>,
    pub two_stage_available: Vec<bool>,
    pub baseline: Vec<f64>,
    pub baseline_available: Vec<bool>,
}

impl StateSeriesFile {
    pub fn series_set(&self) -> SeriesSet<'_> {
        SeriesSet {
            span: self.span,
            actual: &self.actual,
            two_stage: &self.two_stage,
            two_stage_available: &self.two_stage_available,
            baseline: &self.baseline,
            baseline_available: &self.baseline_available,
        }
    }
}

pub fn write_state_series(path: &Path, s: &StateSeriesFile) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(STATE_SERIES_HEADER)?;
    for (i, h) in s.span.iter().enumerate() {
        w.write_record([
            h.to_string(),
            fmt_f64(s.actual[i]),
            fmt_f64(s.two_stage[i]),
            fmt_bool(s.two_stage_available[i]).to_string(),
            fmt_f64(s.baseline[i]),
            fmt_bool(s.baseline_available[i]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_state_series(path: &Path) -> Result<StateSeriesFile> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &STATE_SERIES_HEADER)?;
    let mut hours = Vec::new();
    let mut s = StateSeriesFile {
        span: HourSpan::new(Hour(0), 0),
        actual: Vec::new(),
        two_stage: Vec::new(),
        two_stage_available: Vec::new(),
        baseline: Vec::new(),
        baseline_available: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        hours.push(Hour::parse(&rec[c[0]]).map_err(|e| Error::parse(loc(), e.to_string()))?);
        s.actual.push(parse_f64(&rec[c[1]], loc)?);
        s.two_stage.push(parse_f64(&rec[c[2]], loc)?);
        s.two_stage_available.push(parse_bool(&rec[c[3]], loc)?);
        s.baseline.push(parse_f64(&rec[c[4]], loc)?);
        s.baseline_available.push(parse_bool(&rec[c[5]], loc)?);
    }
    let Some(&start) = hours.first() else {
        return Err(Error::InvalidInput(format!("{} has no rows", path.display())));
    };
    if let Some(i) = hours.iter().enumerate().position(|(i, h)| h.0 != start.0 + i as i64) {
        return Err(Error::NonContiguous { index: i });
    }
    s.span = HourSpan::new(start, hours.len());
    Ok(s)
}

fn external_events(cfg: &PipelineConfig) -> Result<Vec<crate::eval::ExternalEvent>> {
    let path = cfg.resolve(&cfg.paths.external_events);
    if path.is_file() {
        read_external_events(&path)
    } else {
        Ok(Vec::new())
    }
}

fn build_report(cfg: &PipelineConfig, out: &Path, scope: Scope, with_bootstrap: bool) -> Result<(StateSeriesFile, Report)> {
    let art = Artifacts::new(out);
    let series = read_state_series(require(&art.state_series())?)?;
    let gate = read_gate_outcome(require(&art.predictions())?)?;
    let report = evaluate(&series.series_set(), Some(&gate), &external_events(cfg)?, scope, &cfg.eval, with_bootstrap)?;
    Ok((series, report))
}

pub fn eval(cfg: &PipelineConfig, out: &Path, scope: Scope) -> Result<Report> {
    let (_, report) = build_report(cfg, out, scope, false)?;
    write_json(&Artifacts::new(out).eval(), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub scope: Scope,
    pub two_stage: BootstrapSummary,
    pub baseline: BootstrapSummary,
}

pub fn bootstrap(cfg: &PipelineConfig, out: &Path, scope: Scope) -> Result<BootstrapReport> {
    let art = Artifacts::new(out);
    let s = read_state_series(require(&art.state_series())?)?;
    let bcfg = cfg.eval.bootstrap();
    let run = |yhat: &[f64], avail: &[bool]| {
        let mask = (scope == Scope::Available).then_some(avail);
        let pred: Vec<f64> = match mask {
            Some(m) => yhat.iter().zip(m).map(|(&v, &a)| if a { v } else { 0.0 }).collect(),
            None => yhat.to_vec(),
        };
        block_bootstrap(&s.actual, &pred, mask, &bcfg)
    };
    let rep = BootstrapReport {
        scope,
        two_stage: run(&s.two_stage, &s.two_stage_available)?,
        baseline: run(&s.baseline, &s.baseline_available)?,
    };
    write_json(&art.bootstrap(), &rep)?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfRow {
    pub lag: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Autocorrelation of the actual test-span state series.
    pub acf: Vec<AcfRow>,
    /// Spatial autocorrelation of mean test-span outages per 1000 residents.
    pub moran: Option<MoranResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    #[serde(flatten)]
    pub eval: Report,
    pub diagnostics: Diagnostics,
}

fn diagnostics(cfg: &PipelineConfig, out: &Path, series: &StateSeriesFile) -> Result<Diagnostics> {
    let lags: Vec<usize> = DEFAULT_ACF_LAGS.iter().copied().filter(|&l| l < series.actual.len()).collect();
    let acf_rows = acf(&series.actual, &lags)?
        .into_iter()
        .zip(&lags)
        .map(|(value, &lag)| AcfRow { lag, value })
        .collect();
    let adjacency = cfg.resolve(&cfg.paths.adjacency);
    let moran = if adjacency.is_file() && cfg.eval.moran_permutations > 0 {
        let art = Artifacts::new(out);
        let outages = read_outage_hourly(require(&art.outage_hourly())?)?;
        let statics = read_statics(&input(cfg, &cfg.paths.statics)?)?;
        let ids: Vec<String> = statics.iter().map(|s| s.county_id.clone()).collect();
        let nb = read_adjacency(&adjacency, &ids)?;
        let x: Vec<f64> = statics
            .iter()
            .map(|s| {
                let c = outages.county_index(&s.county_id).ok_or_else(|| Error::MissingCounty(s.county_id.clone()))?;
                let vals: Vec<f64> = series.span.iter().filter_map(|h| outages.span.index_of(h).and_then(|i| outages.values[c][i])).collect();
                let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
                Ok(1000.0 * mean / s.population.max(1.0))
            })
            .collect::<Result<_>>()?;
        Some(morans_i(&x, &nb, cfg.eval.moran_permutations, cfg.seed)?)
    } else {
        None
    };
    Ok(Diagnostics { acf: acf_rows, moran })
}

pub fn report(cfg: &PipelineConfig, out: &Path, scope: Scope) -> Result<FullReport> {
    let art = Artifacts::new(out);
    let (series, eval) = build_report(cfg, out, scope, true)?;
    let diagnostics = diagnostics(cfg, out, &series)?;
    let full = FullReport { eval, diagnostics };
    write_json(&art.report(), &full)?;
    write_figure(&art.figure_svg(), &art.figure_csv(), &series, cfg.eval.threshold)?;
    Ok(full)
}

/// Text-templated SVG of actual, two-stage and baseline state series with the
/// threshold line, plus the plotted values as CSV.
pub fn write_figure(svg: &Path, csv_path: &Path, s: &StateSeriesFile, threshold: f64) -> Result<()> {
    let mut w = create_csv(csv_path)?;
    w.write_record(["hour", "actual", "two_stage", "baseline", "threshold"])?;
    for (i, h) in s.span.iter().enumerate() {
        w.write_record([h.to_string(), fmt_f64(s.actual[i]), fmt_f64(s.two_stage[i]), fmt_f64(s.baseline[i]), fmt_f64(threshold)])?;
    }
    w.flush()?;
    std::fs::write(svg, render_svg(s, threshold))?;
    Ok(())
}

fn render_svg(s: &StateSeriesFile, threshold: f64) -> String {
    let (width, height) = (1000.0, 420.0);
    let (left, right, top, bottom) = (80.0, 20.0, 40.0, 50.0);
    let ymax = s
        .actual
        .iter()
        .chain(&s.two_stage)
        .chain(&s.baseline)
        .copied()
        .filter(|v| v.is_finite())
        .fold(threshold, f64::max)
        * 1.05;
    let n = s.span.len.max(2) as f64 - 1.0;
    let px = |i: usize| left + (width - left - right) * i as f64 / n;
    let py = |v: f64| top + (height - top - bottom) * (1.0 - v.max(0.0) / ymax);
    let line = |v: &[f64]| {
        let mut pts = String::new();
        for (i, &y) in v.iter().enumerate() {
            let _ = write!(pts, "{:.1},{:.1} ", px(i), py(y));
        }
        pts.trim_end().to_string()
    };
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{left}" y="22" font-size="14">State customers out: actual vs two-stage vs baseline</text>"#);
    let (x0, x1, y0, y1) = (left, width - right, top, height - bottom);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="black"/>"#);
    let _ = writeln!(out, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for k in 0..=4 {
        let v = ymax * k as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.0}</text>"#, x0 - 6.0, y + 4.0, v);
    }
    let _ = writeln!(out, r#"<text x="{x0}" y="{:.1}">{}</text>"#, y1 + 20.0, s.span.start);
    let _ = writeln!(out, r#"<text x="{x1}" y="{:.1}" text-anchor="end">{}</text>"#, y1 + 20.0, s.span.end().offset(-1));
    let ty = py(threshold);
    let _ = writeln!(out, r##"<line x1="{x0}" y1="{ty:.1}" x2="{x1}" y2="{ty:.1}" stroke="#c0392b" stroke-dasharray="6 4"/>"##);
    let _ = writeln!(out, r##"<text x="{:.1}" y="{:.1}" fill="#c0392b" text-anchor="end">{:.0}</text>"##, x1, ty - 4.0, threshold);
    let series = [
        ("actual", "#222222", "", &s.actual),
        ("two-stage", "#1f77b4", "", &s.two_stage),
        ("baseline", "#ff7f0e", r#" stroke-dasharray="4 3""#, &s.baseline),
    ];
    for (k, (name, colour, dash, v)) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2"{dash} points="{}"/>"#, line(v));
        let lx = x1 - 260.0 + 90.0 * k as f64;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="2"{dash}/>"#, top - 12.0, lx + 20.0, top - 12.0);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{name}</text>"#, lx + 24.0, top - 8.0);
    }
    out.push_str("</svg>\n");
    out
}

/// Every stage from ingest to report.
pub fn run_all(cfg: &PipelineConfig, out: &Path, scope: Scope) -> Result<FullReport> {
    ingest(cfg, out)?;
    interp(cfg, out)?;
    features(cfg, out)?;
    train(cfg, out)?;
    predict(cfg, out)?;
    eval(cfg, out, scope)?;
    bootstrap(cfg, out, scope)?;
    report(cfg, out, scope)
}
