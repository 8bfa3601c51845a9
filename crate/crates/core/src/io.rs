//! CSV helpers shared by the stage readers and writers.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::error::{Error, Result};

pub fn open_csv(path: &Path) -> Result<csv::Reader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file)))
}

pub fn create_csv(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(File::create(path)?)))
}

/// Column positions of `names` within the header row.
pub fn columns(path: &Path, headers: &csv::StringRecord, names: &[&str]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            headers.iter().position(|h| h == *n).ok_or_else(|| {
                Error::parse(path.display().to_string(), format!("missing column `{n}`"))
            })
        })
        .collect()
}

pub fn location(path: &Path, rec: &csv::StringRecord) -> String {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    format!("{}:{}", path.display(), line)
}

pub fn parse_f64(s: &str, loc: impl Fn() -> String) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::parse(loc(), format!("invalid number `{s}`")))
}

pub fn parse_opt_f64(s: &str, loc: impl Fn() -> String) -> Result<Option<f64>> {
    if s.is_empty() || s.eq_ignore_ascii_case("nan") || s.eq_ignore_ascii_case("na") {
        Ok(None)
    } else {
        parse_f64(s, loc).map(Some)
    }
}

pub fn parse_bool(s: &str, loc: impl Fn() -> String) -> Result<bool> {
    match s {
        "1" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "false" | "False" | "FALSE" | "" => Ok(false),
        _ => Err(Error::parse(loc(), format!("invalid boolean `{s}`"))),
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // normalise -0
        "0".to_string()
    } else {
        format!("{v}")
    }
}

pub fn fmt_bool(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let s = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(serde_json::from_str(&s)?)
}
