//! CSV schemas owned by the ingest stage.

use std::path::Path;

use super::outage::{OutageHourlyGrid, OutageRecord};
use super::weather::{RawWeatherRecord, StationHourly, WxCodes};
use crate::error::{Error, Result};
use crate::io::{columns, create_csv, fmt_bool, fmt_f64, fmt_opt, location, open_csv, parse_bool, parse_f64, parse_opt_f64};
use crate::time::{format_utc, parse_utc, Hour, HourSpan};

pub const OUTAGE_HEADER: [&str; 3] = ["county_id", "timestamp_utc", "customers_out"];
pub const WEATHER_HEADER: [&str; 12] = [
    "station_id", "timestamp_utc", "tmpf", "dwpf", "relh", "drct", "sknt", "p01i", "alti", "mslp", "gust", "wxcodes",
];
pub const STATION_HEADER: [&str; 3] = ["station_id", "lon", "lat"];
pub const OUTAGE_HOURLY_HEADER: [&str; 4] = ["county_id", "hour_utc", "customers_out", "long_gap"];
pub const STATION_HOURLY_HEADER: [&str; 16] = [
    "station_id", "hour_utc", "tmpf", "dwpf", "relh", "drct", "sknt", "p01i", "alti", "mslp", "gust", "u", "v",
    "ts_flag", "sq_flag", "hr_flag",
];

/// Reads 15-minute outage records; rows with an empty count are treated as missing and skipped.
pub fn read_outages(path: &Path) -> Result<Vec<OutageRecord>> {
    let mut rdr = open_csv(path)?;
    let cols = columns(path, rdr.headers()?, &OUTAGE_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let Some(v) = parse_opt_f64(&rec[cols[2]], loc)? else {
            continue;
        };
        let r = OutageRecord {
            county_id: rec[cols[0]].to_string(),
            timestamp: parse_utc(&rec[cols[1]]).map_err(|e| Error::parse(loc(), e.to_string()))?,
            customers_out: v,
        };
        r.validate().map_err(|e| Error::parse(loc(), e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

pub fn write_outages(path: &Path, records: &[OutageRecord]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(OUTAGE_HEADER)?;
    for r in records {
        w.write_record([r.county_id.clone(), format_utc(r.timestamp), fmt_f64(r.customers_out)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_weather(path: &Path) -> Result<Vec<RawWeatherRecord>> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &WEATHER_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let f = |i: usize| parse_opt_f64(&rec[c[i]], loc);
        let r = RawWeatherRecord {
            station_id: rec[c[0]].to_string(),
            timestamp: parse_utc(&rec[c[1]]).map_err(|e| Error::parse(loc(), e.to_string()))?,
            tmpf: f(2)?,
            dwpf: f(3)?,
            relh: f(4)?,
            drct: f(5)?,
            sknt: f(6)?,
            p01i: f(7)?,
            alti: f(8)?,
            mslp: f(9)?,
            gust: f(10)?,
            wxcodes: WxCodes::parse(&rec[c[11]]),
        };
        r.validate().map_err(|e| Error::parse(loc(), e.to_string()))?;
        out.push(r);
    }
    Ok(out)
}

pub fn write_weather(path: &Path, records: &[RawWeatherRecord]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(WEATHER_HEADER)?;
    for r in records {
        w.write_record([
            r.station_id.clone(),
            format_utc(r.timestamp),
            fmt_opt(r.tmpf),
            fmt_opt(r.dwpf),
            fmt_opt(r.relh),
            fmt_opt(r.drct),
            fmt_opt(r.sknt),
            fmt_opt(r.p01i),
            fmt_opt(r.alti),
            fmt_opt(r.mslp),
            fmt_opt(r.gust),
            r.wxcodes.format(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stations(path: &Path) -> Result<Vec<(String, f64, f64)>> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &STATION_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        out.push((
            rec[c[0]].to_string(),
            parse_f64(&rec[c[1]], loc)?,
            parse_f64(&rec[c[2]], loc)?,
        ));
    }
    Ok(out)
}

pub fn write_stations(path: &Path, stations: &[(String, f64, f64)]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(STATION_HEADER)?;
    for (id, lon, lat) in stations {
        w.write_record([id.clone(), fmt_f64(*lon), fmt_f64(*lat)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_outage_hourly(path: &Path, grid: &OutageHourlyGrid) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(OUTAGE_HOURLY_HEADER)?;
    for (c, id) in grid.counties.iter().enumerate() {
        for (h, hour) in grid.span.iter().enumerate() {
            w.write_record([
                id.clone(),
                hour.to_string(),
                fmt_opt(grid.values[c][h]),
                fmt_bool(grid.long_gap[c][h]).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_outage_hourly(path: &Path) -> Result<OutageHourlyGrid> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &OUTAGE_HOURLY_HEADER)?;
    let mut rows: Vec<(String, Hour, Option<f64>, bool)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        rows.push((
            rec[c[0]].to_string(),
            Hour::parse(&rec[c[1]]).map_err(|e| Error::parse(loc(), e.to_string()))?,
            parse_opt_f64(&rec[c[2]], loc)?,
            parse_bool(&rec[c[3]], loc)?,
        ));
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{} has no rows", path.display())));
    }
    let mut counties: Vec<String> = rows.iter().map(|r| r.0.clone()).collect();
    counties.sort();
    counties.dedup();
    let lo = rows.iter().map(|r| r.1).min().unwrap();
    let hi = rows.iter().map(|r| r.1).max().unwrap();
    let span = HourSpan::new(lo, (hi.0 - lo.0 + 1) as usize);
    let mut grid = OutageHourlyGrid::new(counties, span);
    for (id, hour, v, gap) in rows {
        let ci = grid.county_index(&id).expect("county collected above");
        let hi = span.index_of(hour).expect("hour inside span");
        grid.values[ci][hi] = v;
        grid.long_gap[ci][hi] = gap;
    }
    Ok(grid)
}

pub fn write_station_hourly(path: &Path, rows: &[StationHourly]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(STATION_HOURLY_HEADER)?;
    for r in rows {
        w.write_record([
            r.station_id.clone(),
            r.hour.to_string(),
            fmt_opt(r.tmpf),
            fmt_opt(r.dwpf),
            fmt_opt(r.relh),
            fmt_opt(r.drct),
            fmt_opt(r.sknt),
            fmt_opt(r.p01i),
            fmt_opt(r.alti),
            fmt_opt(r.mslp),
            fmt_opt(r.gust),
            fmt_opt(r.u),
            fmt_opt(r.v),
            fmt_bool(r.ts_flag).to_string(),
            fmt_bool(r.sq_flag).to_string(),
            fmt_bool(r.hr_flag).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_station_hourly(path: &Path) -> Result<Vec<StationHourly>> {
    let mut rdr = open_csv(path)?;
    let c = columns(path, rdr.headers()?, &STATION_HOURLY_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let f = |i: usize| parse_opt_f64(&rec[c[i]], loc);
        out.push(StationHourly {
            station_id: rec[c[0]].to_string(),
            hour: Hour::parse(&rec[c[1]]).map_err(|e| Error::parse(loc(), e.to_string()))?,
            tmpf: f(2)?,
            dwpf: f(3)?,
            relh: f(4)?,
            drct: f(5)?,
            sknt: f(6)?,
            p01i: f(7)?,
            alti: f(8)?,
            mslp: f(9)?,
            gust: f(10)?,
            u: f(11)?,
            v: f(12)?,
            ts_flag: parse_bool(&rec[c[13]], loc)?,
            sq_flag: parse_bool(&rec[c[14]], loc)?,
            hr_flag: parse_bool(&rec[c[15]], loc)?,
        });
    }
    Ok(out)
}
