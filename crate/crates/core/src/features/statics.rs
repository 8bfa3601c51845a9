//! County static attributes and calendar encodings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{columns, create_csv, fmt_f64, location, open_csv, parse_f64};

pub const STATICS_HEADER: [&str; 5] = ["county_id", "lon", "lat", "population", "area_km2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountyStatic {
    pub county_id: String,
    pub lon: f64,
    pub lat: f64,
    pub population: f64,
    pub area_km2: f64,
}

impl CountyStatic {
    pub fn population_density(&self) -> f64 {
        population_density(self.population, self.area_km2)
    }
}

/// People per km².
pub fn population_density(population: f64, area_km2: f64) -> f64 {
    population / area_km2
}

/// Stable integer code per county: position in sorted id order.
pub fn county_encoding<S: AsRef<str>>(ids: &[S]) -> BTreeMap<String, usize> {
    let mut sorted: Vec<&str> = ids.iter().map(|s| s.as_ref()).collect();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.into_iter().enumerate().map(|(i, s)| (s.to_string(), i)).collect()
}

/// Looks up every requested county, failing on the first one absent from the table.
pub fn lookup_statics<'a>(table: &'a [CountyStatic], counties: &[String]) -> Result<Vec<&'a CountyStatic>> {
    let by_id: BTreeMap<&str, &CountyStatic> = table.iter().map(|s| (s.county_id.as_str(), s)).collect();
    counties
        .iter()
        .map(|c| by_id.get(c.as_str()).copied().ok_or_else(|| Error::MissingCounty(c.clone())))
        .collect()
}

pub fn read_statics(path: &Path) -> Result<Vec<CountyStatic>> {
    let mut r = open_csv(path)?;
    let headers = r.headers()?.clone();
    let col = columns(path, &headers, &STATICS_HEADER)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let loc = || location(path, &rec);
        let s = CountyStatic {
            county_id: rec[col[0]].to_string(),
            lon: parse_f64(&rec[col[1]], loc)?,
            lat: parse_f64(&rec[col[2]], loc)?,
            population: parse_f64(&rec[col[3]], loc)?,
            area_km2: parse_f64(&rec[col[4]], loc)?,
        };
        if !(s.area_km2 > 0.0) || s.population < 0.0 {
            return Err(Error::parse(loc(), "population must be ≥ 0 and area > 0"));
        }
        out.push(s);
    }
    Ok(out)
}

pub fn write_statics(path: &Path, rows: &[CountyStatic]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(STATICS_HEADER)?;
    for s in rows {
        w.write_record([
            s.county_id.clone(),
            fmt_f64(s.lon),
            fmt_f64(s.lat),
            fmt_f64(s.population),
            fmt_f64(s.area_km2),
        ])?;
    }
    w.flush()?;
    Ok(())
}
