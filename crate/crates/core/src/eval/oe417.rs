//! Reconciliation of the internal outage series against external incident reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::{columns, location, open_csv, parse_opt_f64};
use crate::time::{parse_utc, Hour, HourSpan};

pub const EXTERNAL_HEADER: [&str; 3] = ["begin_utc", "end_utc", "customers"];

/// Hours searched on either side of the stated window for the internal peak.
const SEARCH_PAD: i64 = 12;
/// Assumed duration when the report gives no end time.
const OPEN_WINDOW_H: i64 = 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalEvent {
    pub begin: String,
    /// Empty or `Unknown` when the restoration time was not reported.
    pub end: String,
    pub customers: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oe417Row {
    pub begin: String,
    pub end: String,
    pub external: Option<f64>,
    pub internal_max: Option<f64>,
    pub delta_pct: Option<f64>,
    /// Hours between the internal peak and the stated window (0 inside it).
    pub offset_h: Option<i64>,
    pub complete: bool,
    pub confidence: Confidence,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Signed percent difference of the internal maximum relative to the external magnitude.
pub fn delta_pct(internal: f64, external: f64) -> Option<f64> {
    (external > 0.0).then(|| (internal - external) / external * 100.0)
}

pub fn grade(offset_h: i64, delta: f64, complete: bool) -> Confidence {
    if offset_h <= 6 && delta.abs() <= 15.0 && complete {
        Confidence::High
    } else if offset_h <= 12 && delta.abs() <= 40.0 {
        Confidence::Medium
    } else {
        Confidence::Low
    }
}

fn window(ev: &ExternalEvent) -> std::result::Result<(Hour, Hour, bool), String> {
    let begin = parse_utc(&ev.begin).map_err(|_| format!("unparseable window begin `{}`", ev.begin))?;
    let b = Hour::from_datetime(begin);
    let end = ev.end.trim();
    if end.is_empty() || end.eq_ignore_ascii_case("unknown") {
        return Ok((b, b.offset(OPEN_WINDOW_H), false));
    }
    let e = Hour::from_datetime(parse_utc(end).map_err(|_| format!("unparseable window end `{end}`"))?);
    if e < b {
        return Err("window ends before it begins".into());
    }
    Ok((b, e, true))
}

fn max_over(span: HourSpan, series: &[f64], a: Hour, b: Hour) -> Option<(Hour, f64)> {
    let mut best: Option<(Hour, f64)> = None;
    let mut h = a;
    while h <= b {
        if let Some(k) = span.index_of(h) {
            if best.is_none_or(|(_, v)| series[k] > v) {
                best = Some((h, series[k]));
            }
        }
        h = h.offset(1);
    }
    best
}

/// One row per external event. `series` is the internal hourly state total over `span`.
pub fn oe417_reconcile(span: HourSpan, series: &[f64], events: &[ExternalEvent]) -> Vec<Oe417Row> {
    events
        .iter()
        .map(|ev| {
            let mut row = Oe417Row {
                begin: ev.begin.clone(),
                end: ev.end.clone(),
                external: ev.customers,
                internal_max: None,
                delta_pct: None,
                offset_h: None,
                complete: false,
                confidence: Confidence::Low,
                note: None,
            };
            let (b, e, complete) = match window(ev) {
                Ok(w) => w,
                Err(msg) => {
                    row.note = Some(msg);
                    return row;
                }
            };
            row.complete = complete;
            row.internal_max = max_over(span, series, b, e).map(|x| x.1);
            let Some((peak_at, _)) = max_over(span, series, b.offset(-SEARCH_PAD), e.offset(SEARCH_PAD)) else {
                row.note = Some("window lies outside the internal series".into());
                return row;
            };
            let offset = if peak_at < b { b.0 - peak_at.0 } else { (peak_at.0 - e.0).max(0) };
            row.offset_h = Some(offset);
            row.delta_pct = match (row.internal_max, ev.customers) {
                (Some(i), Some(x)) => delta_pct(i, x),
                _ => None,
            };
            match row.delta_pct {
                Some(d) => row.confidence = grade(offset, d, complete),
                None => row.note = Some("external magnitude missing (loss of monitoring)".into()),
            }
            row
        })
        .collect()
}

pub fn read_external_events(path: &Path) -> Result<Vec<ExternalEvent>> {
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    let c = columns(path, &headers, &EXTERNAL_HEADER)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let customers = parse_opt_f64(&rec[c[2]], || location(path, &rec))?;
        out.push(ExternalEvent { begin: rec[c[0]].to_string(), end: rec[c[1]].to_string(), customers });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(b: &str, e: &str, c: Option<f64>) -> ExternalEvent {
        ExternalEvent { begin: b.into(), end: e.into(), customers: c }
    }

    fn series_with_peak(span: HourSpan, at: Hour, v: f64) -> Vec<f64> {
        span.iter().map(|h| if h == at { v } else { 1000.0 }).collect()
    }

    #[test]
    fn open_window_is_medium() {
        let start = Hour::parse("2021-06-29T00:00:00Z").unwrap();
        let span = HourSpan::new(start, 72);
        let s = series_with_peak(span, start.offset(18), 66_072.0);
        let r = &oe417_reconcile(span, &s, &[ev("2021-06-29 16:00", "Unknown", Some(53_000.0))])[0];
        assert!((r.delta_pct.unwrap() - 24.66).abs() < 0.01);
        assert_eq!(r.confidence, Confidence::Medium);
        assert!(!r.complete);
    }

    #[test]
    fn aligned_equal_is_high_and_missing_is_low() {
        let start = Hour::parse("2022-07-23T00:00:00Z").unwrap();
        let span = HourSpan::new(start, 72);
        let s = series_with_peak(span, start.offset(22), 93_750.0);
        let rows = oe417_reconcile(
            span,
            &s,
            &[
                ev("2022-07-23 20:45", "2022-07-24 11:30", Some(93_750.0)),
                ev("2022-07-23 20:45", "2022-07-24 11:30", Some(0.0)),
                ev("2022-07-23 20:45", "2022-07-24 11:30", None),
                ev("not a date", "", Some(5.0)),
            ],
        );
        assert_eq!(rows[0].delta_pct, Some(0.0));
        assert_eq!(rows[0].confidence, Confidence::High);
        for r in &rows[1..] {
            assert_eq!(r.confidence, Confidence::Low);
            assert_eq!(r.delta_pct, None);
            assert!(r.note.is_some());
        }
    }

    #[test]
    fn late_peak_lowers_confidence() {
        let start = Hour::parse("2022-07-23T00:00:00Z").unwrap();
        let span = HourSpan::new(start, 96);
        let mut s = series_with_peak(span, start.offset(45), 93_750.0);
        s[30] = 90_000.0;
        let r = &oe417_reconcile(span, &s, &[ev("2022-07-23 20:45", "2022-07-24 11:30", Some(93_750.0))])[0];
        assert_eq!(r.offset_h, Some(10));
        assert_eq!(r.confidence, Confidence::Medium);
    }
}
