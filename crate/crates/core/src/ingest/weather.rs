//! METAR records to hourly station rows.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::wind::decompose_wind;
use crate::error::{Error, Result};
use crate::spatial::{LocalProjection, Point};
use crate::time::{Hour, HourSpan};

/// Hours a missing value may be carried forward after hourly aggregation.
pub const FORWARD_FILL_HOURS: usize = 2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WxCodes {
    pub ts: bool,
    pub sq: bool,
    pub hr: bool,
}

impl WxCodes {
    /// Parses a pipe list such as `TS|SQ`. Unknown codes are ignored.
    pub fn parse(s: &str) -> Self {
        let mut w = WxCodes::default();
        for code in s.split('|').map(str::trim) {
            match code.to_ascii_uppercase().as_str() {
                "TS" => w.ts = true,
                "SQ" => w.sq = true,
                "HR" => w.hr = true,
                _ => {}
            }
        }
        w
    }

    pub fn format(&self) -> String {
        let mut parts = Vec::new();
        if self.ts {
            parts.push("TS");
        }
        if self.sq {
            parts.push("SQ");
        }
        if self.hr {
            parts.push("HR");
        }
        parts.join("|")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawWeatherRecord {
    pub station_id: String,
    pub timestamp: DateTime<Utc>,
    pub tmpf: Option<f64>,
    pub dwpf: Option<f64>,
    pub relh: Option<f64>,
    pub drct: Option<f64>,
    pub sknt: Option<f64>,
    pub p01i: Option<f64>,
    pub alti: Option<f64>,
    pub mslp: Option<f64>,
    pub gust: Option<f64>,
    pub wxcodes: WxCodes,
}

impl RawWeatherRecord {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &str, v: f64| {
            Error::InvalidInput(format!(
                "{name}={v} out of range for station {} at {}",
                self.station_id, self.timestamp
            ))
        };
        if let Some(v) = self.relh {
            if !(0.0..=100.0).contains(&v) {
                return Err(bad("relh", v));
            }
        }
        if let Some(v) = self.drct {
            if !(0.0..360.0).contains(&v) {
                return Err(bad("drct", v));
            }
        }
        for (name, v) in [("sknt", self.sknt), ("gust", self.gust), ("p01i", self.p01i)] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return Err(bad(name, v));
                }
            }
        }
        Ok(())
    }
}

/// One station-hour after aggregation. Wind components are in m/s.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StationHourly {
    pub station_id: String,
    pub hour: Hour,
    pub tmpf: Option<f64>,
    pub dwpf: Option<f64>,
    pub relh: Option<f64>,
    pub drct: Option<f64>,
    pub sknt: Option<f64>,
    pub p01i: Option<f64>,
    pub alti: Option<f64>,
    pub mslp: Option<f64>,
    pub gust: Option<f64>,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub ts_flag: bool,
    pub sq_flag: bool,
    pub hr_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationMeta {
    pub station_id: String,
    pub lon: f64,
    pub lat: f64,
    pub x: f64,
    pub y: f64,
}

impl StationMeta {
    pub fn point(&self) -> Point<f64> {
        Point::new(self.x, self.y)
    }
}

/// Projects `(id, lon, lat)` triples with the given projection. Duplicate ids are rejected.
pub fn project_stations(raw: &[(String, f64, f64)], proj: &LocalProjection) -> Result<Vec<StationMeta>> {
    let mut seen = std::collections::HashSet::new();
    raw.iter()
        .map(|(id, lon, lat)| {
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidInput(format!("duplicate station id {id}")));
            }
            let p = proj.project(*lon, *lat);
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coordinates for {id}")));
            }
            Ok(StationMeta {
                station_id: id.clone(),
                lon: *lon,
                lat: *lat,
                x: p.x,
                y: p.y,
            })
        })
        .collect()
}

#[derive(Default)]
struct HourAcc<'a> {
    recs: Vec<&'a RawWeatherRecord>,
}

fn mean_of(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (s, n) = vals.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn max_of(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    vals.flatten().fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
}

impl HourAcc<'_> {
    fn aggregate(&self, station_id: &str, hour: Hour) -> StationHourly {
        let r = &self.recs;
        // Direction at the (earliest) within-hour maximum wind speed.
        let mut best: Option<&RawWeatherRecord> = None;
        for rec in r.iter() {
            if let Some(s) = rec.sknt {
                if best.is_none_or(|b| s > b.sknt.unwrap_or(f64::NEG_INFINITY)) {
                    best = Some(rec);
                }
            }
        }
        StationHourly {
            station_id: station_id.to_string(),
            hour,
            tmpf: mean_of(r.iter().map(|x| x.tmpf)),
            dwpf: mean_of(r.iter().map(|x| x.dwpf)),
            relh: mean_of(r.iter().map(|x| x.relh)),
            alti: mean_of(r.iter().map(|x| x.alti)),
            mslp: mean_of(r.iter().map(|x| x.mslp)),
            sknt: best.and_then(|b| b.sknt),
            drct: best.and_then(|b| b.drct),
            p01i: Some(max_of(r.iter().map(|x| x.p01i)).unwrap_or(0.0)),
            gust: max_of(r.iter().map(|x| x.gust)),
            u: None,
            v: None,
            ts_flag: r.iter().any(|x| x.wxcodes.ts),
            sq_flag: r.iter().any(|x| x.wxcodes.sq),
            hr_flag: r.iter().any(|x| x.wxcodes.hr),
        }
    }
}

fn forward_fill(rows: &mut [StationHourly], get: fn(&mut StationHourly) -> &mut Option<f64>, limit: usize) {
    let mut last: Option<(usize, f64)> = None;
    for (i, row) in rows.iter_mut().enumerate() {
        let slot = get(row);
        match *slot {
            Some(v) => last = Some((i, v)),
            None => {
                if let Some((j, v)) = last {
                    if i - j <= limit {
                        *slot = Some(v);
                    }
                }
            }
        }
    }
}

/// Aggregates raw records to exactly one row per `(station, hour)` in `span`,
/// ordered by station then hour. Records outside the span or for unknown
/// stations are ignored.
pub fn resample_weather_hourly(
    records: &[RawWeatherRecord],
    stations: &[String],
    span: HourSpan,
) -> Vec<StationHourly> {
    let mut buckets: BTreeMap<(&str, i64), HourAcc> = BTreeMap::new();
    for r in records {
        let h = Hour::from_datetime(r.timestamp);
        if span.contains(h) {
            buckets.entry((r.station_id.as_str(), h.0)).or_default().recs.push(r);
        }
    }
    let mut out = Vec::with_capacity(stations.len() * span.len);
    for sid in stations {
        let mut rows: Vec<StationHourly> = span
            .iter()
            .map(|h| match buckets.get(&(sid.as_str(), h.0)) {
                Some(acc) => acc.aggregate(sid, h),
                None => StationHourly {
                    station_id: sid.clone(),
                    hour: h,
                    p01i: Some(0.0),
                    ..Default::default()
                },
            })
            .collect();
        let fillable: [fn(&mut StationHourly) -> &mut Option<f64>; 7] = [
            |r| &mut r.tmpf,
            |r| &mut r.dwpf,
            |r| &mut r.relh,
            |r| &mut r.drct,
            |r| &mut r.sknt,
            |r| &mut r.alti,
            |r| &mut r.mslp,
        ];
        for get in fillable {
            forward_fill(&mut rows, get, FORWARD_FILL_HOURS);
        }
        for row in rows.iter_mut() {
            if let (Some(s), Some(d)) = (row.sknt, row.drct) {
                let (u, v) = decompose_wind(s, d);
                row.u = Some(u);
                row.v = Some(v);
            }
        }
        out.extend(rows);
    }
    out
}
