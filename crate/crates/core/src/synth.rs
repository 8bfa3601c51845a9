//! Deterministic synthetic storm season.
//!
//! Counties sit on a jittered lattice, stations are scattered with a southern
//! bias, and each convective episode imprints a dew-point ramp, pressure drop
//! and gust spike on nearby stations at hour `t`. The same footprint, scaled
//! by county customers, becomes an outage surge at `t + lead_hours`.
//!
//! Major storms are normalised to a chosen state-level plateau above the peak
//! threshold; minor storms stay below it so the smoothed truth series crosses
//! the threshold exactly `storm_count` times per split.

use std::path::{Path, PathBuf};

use chrono::Duration;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{lattice_neighbors, write_adjacency, EXTERNAL_HEADER};
use crate::features::{write_statics, CountyStatic};
use crate::ingest::io::{write_outages, write_stations, write_weather};
use crate::ingest::{OutageRecord, RawWeatherRecord, WxCodes};
use crate::io::{create_csv, fmt_opt, write_json};
use crate::spatial::{LocalProjection, Point};
use crate::time::{Hour, HourSpan};

/// Fraction of a county's customers out under a unit-amplitude storm core.
const PHI_MAX: f64 = 0.3;
/// Customers per resident.
const CUSTOMERS_PER_PERSON: f64 = 0.45;
const LON0: f64 = -88.2;
const LAT0: f64 = 34.6;
const DLON: f64 = 0.72;
const DLAT: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_counties: usize,
    pub n_stations: usize,
    /// First hour of the season (UTC).
    pub start: String,
    pub train_hours: usize,
    pub test_hours: usize,
    /// Supra-threshold episodes per split.
    pub storm_count: usize,
    /// Sub-threshold episodes per split.
    pub minor_storms: usize,
    /// State-level plateau range for major storms (customers out).
    pub major_peak: [f64; 2],
    pub minor_peak: [f64; 2],
    pub storm_radius_km: f64,
    pub drift_kmh: f64,
    pub plateau_hours: usize,
    pub ramp_hours: usize,
    pub lead_hours: usize,
    /// Mean statewide background outage level and the sd of its AR(1) swings.
    pub background_level: f64,
    pub background_sd: f64,
    /// Multiplicative county-hour noise on storm outages (log sd).
    pub outage_noise: f64,
    /// Log-scale spread of county populations.
    pub population_sd: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_counties: 36,
            n_stations: 24,
            start: "2021-06-01T00:00:00Z".into(),
            train_hours: 2208,
            test_hours: 2208,
            storm_count: 4,
            minor_storms: 14,
            major_peak: [85_000.0, 150_000.0],
            minor_peak: [5_000.0, 26_000.0],
            storm_radius_km: 110.0,
            drift_kmh: 4.0,
            plateau_hours: 16,
            ramp_hours: 3,
            lead_hours: 48,
            background_level: 8_000.0,
            background_sd: 3_000.0,
            outage_noise: 0.08,
            population_sd: 0.3,
            seed: 20210601,
        }
    }
}

impl SyntheticSpec {
    pub fn span(&self) -> Result<HourSpan> {
        Ok(HourSpan::new(Hour::parse(&self.start)?, self.train_hours + self.test_hours))
    }

    pub fn train_span(&self) -> Result<HourSpan> {
        Ok(HourSpan::new(Hour::parse(&self.start)?, self.train_hours))
    }

    pub fn test_span(&self) -> Result<HourSpan> {
        let s = Hour::parse(&self.start)?;
        Ok(HourSpan::new(s.offset(self.train_hours as i64), self.test_hours))
    }

    fn storm_len(&self) -> usize {
        self.plateau_hours + 2 * self.ramp_hours
    }

    /// Minimum distance between storm onsets: storm length plus merge gap and MA slack.
    fn min_separation(&self) -> usize {
        self.storm_len() + 50
    }

    fn margins(&self) -> (usize, usize) {
        (self.lead_hours + 12, self.lead_hours + self.storm_len() + 24)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("synthetic: {m}")));
        if !(4..=400).contains(&self.n_counties) {
            return bad(format!("n_counties must lie in 4..=400, got {}", self.n_counties));
        }
        if self.n_stations < 6 {
            return bad(format!("n_stations must be at least 6, got {}", self.n_stations));
        }
        Hour::parse(&self.start).map_err(|e| Error::Config(format!("synthetic.start: {e}")))?;
        for (name, r) in [("major_peak", self.major_peak), ("minor_peak", self.minor_peak)] {
            if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return bad(format!("{name} must be an increasing positive range"));
            }
        }
        if !(self.storm_radius_km > 0.0) || !(self.drift_kmh >= 0.0) {
            return bad("storm_radius_km must be positive and drift_kmh non-negative".into());
        }
        if self.plateau_hours < 6 || self.lead_hours == 0 {
            return bad("plateau_hours must be ≥ 6 and lead_hours positive".into());
        }
        if !(self.background_level >= 0.0 && self.background_sd >= 0.0 && self.outage_noise >= 0.0 && self.population_sd >= 0.0) {
            return bad("background and noise levels must be non-negative".into());
        }
        let k = self.storm_count + self.minor_storms;
        let (lo, hi) = self.margins();
        for (name, len) in [("train_hours", self.train_hours), ("test_hours", self.test_hours)] {
            let usable = len.saturating_sub(lo + hi);
            if k > 0 && usable < k * self.min_separation() {
                return bad(format!(
                    "{name}={len} too short for {k} storms (need {} hours)",
                    lo + hi + k * self.min_separation()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StormTruth {
    pub split: String,
    pub major: bool,
    /// First hour of the weather footprint.
    pub onset: String,
    /// First hour of the outage surge.
    pub outage_onset: String,
    pub lon: f64,
    pub lat: f64,
    pub amplitude: f64,
    pub target_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub spec: SyntheticSpec,
    pub storms: Vec<StormTruth>,
    /// Hourly state totals before 15-minute jitter, aligned with the season span.
    pub state_total: Vec<f64>,
}

/// In-memory season.
#[derive(Debug, Clone)]
pub struct SyntheticSeason {
    pub statics: Vec<CountyStatic>,
    pub stations: Vec<(String, f64, f64)>,
    pub neighbors: Vec<Vec<usize>>,
    pub outages: Vec<OutageRecord>,
    pub weather: Vec<RawWeatherRecord>,
    pub external: Vec<(String, String, Option<f64>)>,
    pub truth: SyntheticTruth,
}

impl SyntheticSeason {
    pub fn county_ids(&self) -> Vec<String> {
        self.statics.iter().map(|s| s.county_id.clone()).collect()
    }
}

/// File set written by [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFiles {
    pub outages: PathBuf,
    pub weather: PathBuf,
    pub stations: PathBuf,
    pub statics: PathBuf,
    pub adjacency: PathBuf,
    pub external_events: PathBuf,
    pub truth: PathBuf,
}

impl SyntheticFiles {
    pub fn in_dir(dir: &Path) -> Self {
        SyntheticFiles {
            outages: dir.join("outages.csv"),
            weather: dir.join("weather.csv"),
            stations: dir.join("stations.csv"),
            statics: dir.join("statics.csv"),
            adjacency: dir.join("adjacency.csv"),
            external_events: dir.join("external_events.csv"),
            truth: dir.join("synthetic_truth.json"),
        }
    }
}

struct Storm {
    split: usize,
    major: bool,
    onset: i64,
    centre: Point<f64>,
    velocity: Point<f64>,
    amplitude: f64,
    target_peak: f64,
}

impl Storm {
    /// Footprint amplitude at `p` for season hour index `t` of the weather field.
    fn footprint(&self, p: Point<f64>, t: i64, shape: &[f64], radius: f64) -> f64 {
        let k = t - self.onset;
        if k < 0 || k as usize >= shape.len() {
            return 0.0;
        }
        let c = Point::new(self.centre.x + self.velocity.x * k as f64, self.centre.y + self.velocity.y * k as f64);
        let d2 = (p.x - c.x).powi(2) + (p.y - c.y).powi(2);
        self.amplitude * shape[k as usize] * (-d2 / (2.0 * radius * radius)).exp()
    }
}

fn normal(rng: &mut ChaCha8Rng, sd: f64) -> f64 {
    Normal::new(0.0, sd).expect("finite sd").sample(rng)
}

/// Saturation vapour pressure over water (hPa), Magnus form; `t` in °F.
fn sat_vapour(t_f: f64) -> f64 {
    let t = (t_f - 32.0) * 5.0 / 9.0;
    6.112 * (17.62 * t / (243.12 + t)).exp()
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn storm_shape(spec: &SyntheticSpec) -> Vec<f64> {
    let r = spec.ramp_hours;
    let mut s = Vec::with_capacity(spec.storm_len());
    for i in 0..r {
        s.push((i + 1) as f64 / (r + 1) as f64);
    }
    s.extend(std::iter::repeat(1.0).take(spec.plateau_hours));
    for i in 0..r {
        s.push((r - i) as f64 / (r + 1) as f64);
    }
    s
}

/// Builds the whole season in memory. Same spec ⇒ identical output.
pub fn synthesize(spec: &SyntheticSpec) -> Result<SyntheticSeason> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let span = spec.span()?;
    let n_hours = span.len;
    let lead = spec.lead_hours as i64;
    let radius = spec.storm_radius_km * 1000.0;

    // counties
    let cols = (spec.n_counties as f64).sqrt().ceil() as usize;
    let rows = spec.n_counties.div_ceil(cols);
    let mut statics = Vec::with_capacity(spec.n_counties);
    let cell_km2 = DLON * 111.2 * (LAT0 + rows as f64 * DLAT / 2.0).to_radians().cos() * DLAT * 111.2;
    for i in 0..spec.n_counties {
        let (r, c) = (i / cols, i % cols);
        let lon = LON0 + (c as f64 + 0.5 + rng.gen_range(-0.2..0.2)) * DLON;
        let lat = LAT0 + (r as f64 + 0.5 + rng.gen_range(-0.2..0.2)) * DLAT;
        let pop = (60_000.0 * normal(&mut rng, spec.population_sd.max(1e-12)).exp()).clamp(8_000.0, 900_000.0).round();
        let area = round_to(cell_km2 * rng.gen_range(0.8..1.2), 0.1);
        statics.push(CountyStatic {
            county_id: format!("C{:03}", i + 1),
            lon: round_to(lon, 1e-4),
            lat: round_to(lat, 1e-4),
            population: pop,
            area_km2: area,
        });
    }
    let full = lattice_neighbors(rows, cols, true);
    let neighbors: Vec<Vec<usize>> = full
        .into_iter()
        .take(spec.n_counties)
        .map(|nb| nb.into_iter().filter(|&j| j < spec.n_counties).collect())
        .collect();
    let proj = LocalProjection::about_centroid(&statics.iter().map(|s| (s.lon, s.lat)).collect::<Vec<_>>());
    let county_pts: Vec<Point<f64>> = statics.iter().map(|s| proj.project(s.lon, s.lat)).collect();
    let customers: Vec<f64> = statics.iter().map(|s| (s.population * CUSTOMERS_PER_PERSON).round()).collect();
    let total_customers: f64 = customers.iter().sum();

    // stations: denser towards the south
    let (lon_lo, lon_hi) = (LON0, LON0 + cols as f64 * DLON);
    let (lat_lo, lat_hi) = (LAT0, LAT0 + rows as f64 * DLAT);
    let mut stations = Vec::with_capacity(spec.n_stations);
    for i in 0..spec.n_stations {
        let lon = rng.gen_range(lon_lo..lon_hi);
        let lat = lat_lo + (lat_hi - lat_lo) * rng.gen::<f64>().powf(1.8);
        stations.push((format!("S{:03}", i + 1), round_to(lon, 1e-4), round_to(lat, 1e-4)));
    }
    let station_pts: Vec<Point<f64>> = stations.iter().map(|s| proj.project(s.1, s.2)).collect();

    // storms
    let shape = storm_shape(spec);
    let (xmin, xmax) = (proj.project(lon_lo, LAT0).x, proj.project(lon_hi, LAT0).x);
    let (ymin, ymax) = (proj.project(LON0, lat_lo).y, proj.project(LON0, lat_hi).y);
    let mut storms = Vec::new();
    for (split, (offset, len)) in [(0usize, spec.train_hours), (spec.train_hours, spec.test_hours)].into_iter().enumerate() {
        let k = spec.storm_count + spec.minor_storms;
        if k == 0 {
            continue;
        }
        let (lo, hi) = spec.margins();
        let slot = (len - lo - hi) / k;
        let mut roles: Vec<bool> = (0..k).map(|i| i < spec.storm_count).collect();
        roles.shuffle(&mut rng);
        for (j, &major) in roles.iter().enumerate() {
            let jitter = rng.gen_range(0..=slot - spec.min_separation());
            let onset = (offset + lo + j * slot + jitter) as i64;
            let range = if major { spec.major_peak } else { spec.minor_peak };
            let target = rng.gen_range(range[0]..=range[1]);
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            let speed = spec.drift_kmh * 1000.0;
            let velocity = Point::new(speed * heading.cos(), speed * heading.sin());
            let mid = (spec.storm_len() / 2) as f64;
            let mut best: Option<(Point<f64>, f64)> = None;
            for _ in 0..64 {
                let cx = rng.gen_range(xmin..xmax);
                let cy = ymin + (ymax - ymin) * rng.gen::<f64>().powf(1.5);
                let centre = Point::new(cx, cy);
                let at_mid = Point::new(cx + velocity.x * mid, cy + velocity.y * mid);
                let exposure: f64 = county_pts
                    .iter()
                    .zip(&customers)
                    .map(|(p, n)| n * (-((p.x - at_mid.x).powi(2) + (p.y - at_mid.y).powi(2)) / (2.0 * radius * radius)).exp())
                    .sum();
                let amplitude = target / (PHI_MAX * exposure);
                if best.map_or(true, |b| amplitude < b.1) {
                    best = Some((centre, amplitude));
                }
                if amplitude <= 1.2 {
                    break;
                }
            }
            let (centre, amplitude) = best.expect("at least one draw");
            storms.push(Storm { split, major, onset, centre, velocity, amplitude, target_peak: target });
        }
    }

    // statewide background level: AR(1) swings that are not day-periodic
    let rho_bg: f64 = 0.9;
    let innov = spec.background_sd * (1.0 - rho_bg * rho_bg).sqrt();
    let mut level = Vec::with_capacity(n_hours);
    let mut ar = normal(&mut rng, spec.background_sd.max(1e-12));
    for _ in 0..n_hours {
        ar = rho_bg * ar + normal(&mut rng, innov.max(1e-12));
        level.push((spec.background_level + ar).max(0.0));
    }

    // county hourly outages
    let mut hourly = vec![vec![0.0; n_hours]; spec.n_counties];
    let mut state_total = vec![0.0; n_hours];
    for c in 0..spec.n_counties {
        let share = customers[c] / total_customers;
        let mut spike_left = 0usize;
        let mut spike_mag = 0.0;
        for t in 0..n_hours {
            let mut v = if rng.gen_bool(0.15) { 0.0 } else { share * level[t] * normal(&mut rng, 0.3).exp() };
            if spike_left == 0 && rng.gen_bool(0.002) {
                spike_left = rng.gen_range(2..=6);
                spike_mag = share * spec.background_level * rng.gen_range(2.0..8.0);
            }
            if spike_left > 0 {
                v += spike_mag;
                spike_left -= 1;
            }
            let tw = t as i64 - lead;
            let a: f64 = storms.iter().map(|s| s.footprint(county_pts[c], tw, &shape, radius)).sum();
            if a > 0.0 {
                let noise = if spec.outage_noise > 0.0 { normal(&mut rng, spec.outage_noise).exp() } else { 1.0 };
                v += customers[c] * (PHI_MAX * a).min(1.0) * noise;
            }
            let v = v.min(customers[c]).round();
            hourly[c][t] = v;
            state_total[t] += v;
        }
    }

    // 15-minute ticks; the last tick of each hour carries the hourly value
    let mut outages = Vec::with_capacity(spec.n_counties * n_hours * 4);
    for (c, s) in statics.iter().enumerate() {
        for (t, h) in span.iter().enumerate() {
            let base = h.to_datetime();
            for tick in 0..4 {
                let v = if tick == 3 { hourly[c][t] } else { (hourly[c][t] * rng.gen_range(0.9..1.0)).round() };
                outages.push(OutageRecord {
                    county_id: s.county_id.clone(),
                    timestamp: base + Duration::minutes(15 * tick),
                    customers_out: v,
                });
            }
        }
    }

    // weather
    let mut reg = [0.0f64; 5];
    let regional: Vec<[f64; 5]> = (0..n_hours)
        .map(|_| {
            // temperature, dew point, pressure, wind speed, direction
            let rho = [0.97, 0.97, 0.99, 0.9, 0.95];
            let sd = [2.5, 1.0, 0.03, 1.0, 35.0];
            for i in 0..5 {
                reg[i] = rho[i] * reg[i] + normal(&mut rng, sd[i] * (1.0 - rho[i] * rho[i]).sqrt());
            }
            reg
        })
        .collect();
    let station_bias: Vec<[f64; 3]> = (0..spec.n_stations)
        .map(|_| [normal(&mut rng, 0.8), normal(&mut rng, 0.6), normal(&mut rng, 0.01)])
        .collect();
    let mut weather = Vec::with_capacity(spec.n_stations * n_hours);
    for (s, (id, _, _)) in stations.iter().enumerate() {
        let p = station_pts[s];
        let north_km = (p.y - ymin) / 1000.0;
        for (t, h) in span.iter().enumerate() {
            if rng.gen_bool(0.01) {
                continue;
            }
            let a: f64 = storms.iter().map(|st| st.footprint(p, t as i64, &shape, radius)).sum();
            let r = regional[t];
            let hod = (h.0.rem_euclid(24)) as f64;
            let diurnal = 8.0 * (std::f64::consts::TAU * (hod - 15.0) / 24.0).cos();
            let tmpf = 80.0 - 0.012 * north_km + diurnal + r[0] + station_bias[s][0] + normal(&mut rng, 0.4) - 4.0 * a;
            let dwpf = (55.0 - 0.01 * north_km + r[1] + station_bias[s][1] + normal(&mut rng, 0.3) + 11.0 * a).min(tmpf - 0.5);
            let relh = (100.0 * sat_vapour(dwpf) / sat_vapour(tmpf)).clamp(1.0, 100.0);
            let alti = 29.95 + r[2] + station_bias[s][2] + normal(&mut rng, 0.005) - 0.15 * a;
            let mslp = alti * 33.8639 + normal(&mut rng, 0.2);
            let sknt = (5.0 + r[3] + normal(&mut rng, 0.5) + 9.0 * a).max(0.0);
            let gust = sknt + 6.0 + normal(&mut rng, 1.0).abs() + 30.0 * a;
            let drct = (220.0 + r[4] + normal(&mut rng, 15.0) + 50.0 * a).rem_euclid(360.0);
            let p01i = if a > 0.05 {
                0.8 * a + rng.gen_range(0.0..0.05)
            } else if rng.gen_bool(0.03) {
                rng.gen_range(0.01..0.1)
            } else {
                0.0
            };
            let minute = rng.gen_range(50..=56);
            weather.push(RawWeatherRecord {
                station_id: id.clone(),
                timestamp: h.to_datetime() + Duration::minutes(minute),
                tmpf: Some(round_to(tmpf, 0.1)),
                dwpf: Some(round_to(dwpf, 0.1)),
                relh: Some(round_to(relh, 0.01)),
                drct: Some(round_to(drct, 10.0).rem_euclid(360.0)),
                sknt: Some(round_to(sknt, 1.0)),
                p01i: Some(round_to(p01i, 0.01)),
                alti: Some(round_to(alti, 0.01)),
                mslp: Some(round_to(mslp, 0.1)),
                gust: Some(round_to(gust, 1.0)),
                wxcodes: WxCodes { ts: a > 0.2, sq: a > 0.5, hr: a > 0.6 },
            });
        }
    }

    // external reports for major test storms
    let mut external = Vec::new();
    let majors: Vec<&Storm> = storms.iter().filter(|s| s.split == 1 && s.major).collect();
    for (i, s) in majors.iter().enumerate() {
        let begin = span.start.offset(s.onset + lead);
        let end = if i == 1 {
            "Unknown".to_string()
        } else {
            begin.offset(spec.storm_len() as i64).to_datetime().format("%Y-%m-%d %H:%M").to_string()
        };
        let customers = (i + 1 < majors.len() || majors.len() == 1)
            .then(|| (s.target_peak * (1.0 + normal(&mut rng, 0.1))).round());
        external.push((begin.to_datetime().format("%Y-%m-%d %H:%M").to_string(), end, customers));
    }

    let truth = SyntheticTruth {
        spec: spec.clone(),
        storms: storms
            .iter()
            .map(|s| {
                let (lon, lat) = proj.unproject(s.centre);
                StormTruth {
                    split: if s.split == 0 { "train" } else { "test" }.into(),
                    major: s.major,
                    onset: span.start.offset(s.onset).to_string(),
                    outage_onset: span.start.offset(s.onset + lead).to_string(),
                    lon: round_to(lon, 1e-4),
                    lat: round_to(lat, 1e-4),
                    amplitude: s.amplitude,
                    target_peak: s.target_peak.round(),
                }
            })
            .collect(),
        state_total,
    };
    Ok(SyntheticSeason { statics, stations, neighbors, outages, weather, external, truth })
}

pub fn write_external_events(path: &Path, rows: &[(String, String, Option<f64>)]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(EXTERNAL_HEADER)?;
    for (b, e, c) in rows {
        w.write_record([b.clone(), e.clone(), fmt_opt(*c)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the season's input files into `dir`.
pub fn generate_synthetic(spec: &SyntheticSpec, dir: &Path) -> Result<SyntheticFiles> {
    let season = synthesize(spec)?;
    std::fs::create_dir_all(dir)?;
    let files = SyntheticFiles::in_dir(dir);
    write_outages(&files.outages, &season.outages)?;
    write_weather(&files.weather, &season.weather)?;
    write_stations(&files.stations, &season.stations)?;
    write_statics(&files.statics, &season.statics)?;
    write_adjacency(&files.adjacency, &season.county_ids(), &season.neighbors)?;
    write_external_events(&files.external_events, &season.external)?;
    write_json(&files.truth, &season.truth)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{detect_events, DetectorConfig};

    fn small(storms: usize) -> SyntheticSpec {
        SyntheticSpec {
            n_counties: 16,
            n_stations: 10,
            train_hours: 900,
            test_hours: 900,
            storm_count: storms,
            minor_storms: 4,
            ..Default::default()
        }
    }

    fn split_totals(season: &SyntheticSeason, spec: &SyntheticSpec) -> (Vec<f64>, Vec<f64>) {
        let t = &season.truth.state_total;
        (t[..spec.train_hours].to_vec(), t[spec.train_hours..].to_vec())
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = small(2);
        let a = synthesize(&spec).unwrap();
        let b = synthesize(&spec).unwrap();
        assert_eq!(a.outages, b.outages);
        assert_eq!(a.weather, b.weather);
        assert_eq!(a.truth, b.truth);
        let c = synthesize(&SyntheticSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a.truth.state_total, c.truth.state_total);
    }

    #[test]
    fn files_are_byte_identical() {
        let spec = small(1);
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let f1 = generate_synthetic(&spec, d1.path()).unwrap();
        let f2 = generate_synthetic(&spec, d2.path()).unwrap();
        for (a, b) in [(&f1.outages, &f2.outages), (&f1.weather, &f2.weather), (&f1.statics, &f2.statics), (&f1.truth, &f2.truth)] {
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
    }

    #[test]
    fn no_storms_never_cross_threshold() {
        let spec = small(0);
        let season = synthesize(&spec).unwrap();
        let max = season.truth.state_total.iter().cloned().fold(0.0, f64::max);
        assert!(max < 50_000.0, "max {max}");
    }

    #[test]
    fn exactly_storm_count_events_per_split() {
        for storms in [1, 2, 4] {
            let spec = SyntheticSpec { storm_count: storms, ..small(storms) };
            let season = synthesize(&spec).unwrap();
            let (train, test) = split_totals(&season, &spec);
            for series in [train, test] {
                let ev = detect_events(&series, &DetectorConfig::default());
                assert_eq!(ev.events.len(), storms);
            }
        }
    }

    #[test]
    fn surge_follows_footprint_by_lead() {
        let spec = small(1);
        let season = synthesize(&spec).unwrap();
        let storm = season.truth.storms.iter().find(|s| s.major && s.split == "test").unwrap();
        let onset = Hour::parse(&storm.onset).unwrap();
        let surge = Hour::parse(&storm.outage_onset).unwrap();
        assert_eq!(surge.0 - onset.0, spec.lead_hours as i64);
        let span = spec.span().unwrap();
        let i = span.index_of(surge).unwrap() + spec.ramp_hours + 2;
        assert!(season.truth.state_total[i] > 50_000.0);
        // the footprint is visible in station dew points at the onset, not before
        let gust_at = |h: Hour| {
            season
                .weather
                .iter()
                .filter(|r| Hour::from_datetime(r.timestamp) == h)
                .filter_map(|r| r.gust)
                .fold(0.0, f64::max)
        };
        assert!(gust_at(onset.offset(spec.ramp_hours as i64 + 2)) > gust_at(onset.offset(-30)) + 5.0);
    }

    #[test]
    fn records_are_valid() {
        let season = synthesize(&small(1)).unwrap();
        for r in &season.weather {
            r.validate().unwrap();
        }
        for r in &season.outages {
            r.validate().unwrap();
        }
        assert_eq!(season.neighbors.len(), 16);
    }

    #[test]
    fn too_many_storms_rejected() {
        let spec = SyntheticSpec { storm_count: 40, ..small(1) };
        assert!(matches!(synthesize(&spec), Err(Error::Config(_))));
    }
}
