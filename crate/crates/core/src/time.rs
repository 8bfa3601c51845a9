//! UTC hour axis.

use chrono::{DateTime, Datelike, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whole hours since the Unix epoch (UTC).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Hour(pub i64);

impl Hour {
    pub fn from_datetime(dt: DateTime<Utc>) -> Self {
        Hour(dt.timestamp().div_euclid(3600))
    }

    pub fn to_datetime(self) -> DateTime<Utc> {
        Utc.timestamp_opt(self.0 * 3600, 0)
            .single()
            .expect("hour within chrono range")
    }

    pub fn offset(self, hours: i64) -> Self {
        Hour(self.0 + hours)
    }

    /// Day of week with Monday = 0.
    pub fn day_of_week(self) -> u32 {
        self.to_datetime().weekday().num_days_from_monday()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let dt = parse_utc(s)?;
        if dt.minute() != 0 || dt.second() != 0 {
            return Err(Error::parse(s, "hour timestamp not on the hour"));
        }
        Ok(Hour::from_datetime(dt))
    }
}

impl std::fmt::Display for Hour {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", format_utc(self.to_datetime()))
    }
}

/// Parses an ISO-8601 UTC timestamp (`2021-06-01T00:15:00Z`, offset forms, or a naive
/// `2021-06-01 00:15[:00]` which is taken as UTC).
pub fn parse_utc(s: &str) -> Result<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(naive) = chrono::NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(Utc.from_utc_datetime(&naive));
        }
    }
    Err(Error::parse(s, "unrecognised UTC timestamp"))
}

pub fn format_utc(dt: DateTime<Utc>) -> String {
    dt.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Half-open span of hours `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourSpan {
    pub start: Hour,
    pub len: usize,
}

impl HourSpan {
    pub fn new(start: Hour, len: usize) -> Self {
        HourSpan { start, len }
    }

    pub fn end(&self) -> Hour {
        self.start.offset(self.len as i64)
    }

    pub fn contains(&self, h: Hour) -> bool {
        h >= self.start && h < self.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = Hour> {
        let s = self.start.0;
        (0..self.len as i64).map(move |i| Hour(s + i))
    }

    pub fn index_of(&self, h: Hour) -> Option<usize> {
        self.contains(h).then(|| (h.0 - self.start.0) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let h = Hour::parse("2021-06-01T05:00:00Z").unwrap();
        assert_eq!(h.to_string(), "2021-06-01T05:00:00Z");
        assert!(Hour::parse("2021-06-01T05:15:00Z").is_err());
        assert_eq!(parse_utc("2021-06-01 05:15").unwrap().minute(), 15);
    }

    #[test]
    fn monday_is_zero() {
        // 2021-06-07 was a Monday.
        assert_eq!(Hour::parse("2021-06-07T13:00:00Z").unwrap().day_of_week(), 0);
        assert_eq!(Hour::parse("2021-06-13T13:00:00Z").unwrap().day_of_week(), 6);
    }

    #[test]
    fn negative_hours_floor() {
        let dt = parse_utc("1969-12-31T23:30:00Z").unwrap();
        assert_eq!(Hour::from_datetime(dt), Hour(-1));
    }
}
