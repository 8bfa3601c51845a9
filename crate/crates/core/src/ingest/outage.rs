//! Outage records: 15-minute county counts to an hourly county grid.

use std::collections::BTreeMap;

use chrono::{DateTime, Timelike, Utc};

use crate::error::{Error, Result};
use crate::time::{Hour, HourSpan};

#[derive(Debug, Clone, PartialEq)]
pub struct OutageRecord {
    pub county_id: String,
    pub timestamp: DateTime<Utc>,
    pub customers_out: f64,
}

impl OutageRecord {
    pub fn validate(&self) -> Result<()> {
        if !(self.customers_out >= 0.0) || !self.customers_out.is_finite() {
            return Err(Error::InvalidInput(format!(
                "negative or non-finite customers_out {} for {}",
                self.customers_out, self.county_id
            )));
        }
        if self.timestamp.minute() % 15 != 0 || self.timestamp.second() != 0 || self.timestamp.nanosecond() != 0 {
            return Err(Error::InvalidInput(format!(
                "timestamp {} not on a 15-minute grid",
                self.timestamp
            )));
        }
        Ok(())
    }

    fn tick(&self) -> usize {
        (self.timestamp.minute() / 15) as usize
    }
}

/// Hourly county outage counts on a contiguous hour axis. `values[c][h]` is
/// `None` where missing.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageHourlyGrid {
    pub counties: Vec<String>,
    pub span: HourSpan,
    pub values: Vec<Vec<Option<f64>>>,
    /// Set where a missing run was longer than the gap-fill limit.
    pub long_gap: Vec<Vec<bool>>,
}

impl OutageHourlyGrid {
    pub fn new(counties: Vec<String>, span: HourSpan) -> Self {
        let n = counties.len();
        OutageHourlyGrid {
            counties,
            span,
            values: vec![vec![None; span.len]; n],
            long_gap: vec![vec![false; span.len]; n],
        }
    }

    pub fn county_index(&self, id: &str) -> Option<usize> {
        self.counties.iter().position(|c| c == id)
    }

    /// Statewide total per hour; `None` when every county is missing.
    pub fn state_series(&self) -> Vec<Option<f64>> {
        (0..self.span.len)
            .map(|h| {
                let mut any = false;
                let mut s = 0.0;
                for row in &self.values {
                    if let Some(v) = row[h] {
                        any = true;
                        s += v;
                    }
                }
                any.then_some(s)
            })
            .collect()
    }

    /// Applies [`fill_short_gaps`] to every county series.
    pub fn fill_short_gaps(&mut self, max_gap: usize) {
        for c in 0..self.counties.len() {
            let (vals, long) = fill_runs(&self.values[c], max_gap);
            self.values[c] = vals;
            self.long_gap[c] = long;
        }
    }
}

/// An hourly series with its own hour axis.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    pub hours: Vec<Hour>,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilledSeries {
    pub series: HourlySeries,
    /// True at hours left missing because their run exceeded `max_gap`.
    pub long_gap: Vec<bool>,
}

/// Linearly interpolates interior missing runs of at most `max_gap` hours.
/// Leading and trailing runs are never filled.
pub fn fill_short_gaps(series: &HourlySeries, max_gap: usize) -> Result<FilledSeries> {
    if series.hours.len() != series.values.len() {
        return Err(Error::Shape {
            expected: series.hours.len(),
            got: series.values.len(),
        });
    }
    for (i, w) in series.hours.windows(2).enumerate() {
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::NonContiguous { index: i + 1 });
        }
    }
    let (values, long_gap) = fill_runs(&series.values, max_gap);
    Ok(FilledSeries {
        series: HourlySeries {
            hours: series.hours.clone(),
            values,
        },
        long_gap,
    })
}

fn fill_runs(values: &[Option<f64>], max_gap: usize) -> (Vec<Option<f64>>, Vec<bool>) {
    let mut out = values.to_vec();
    let mut long = vec![false; values.len()];
    let mut i = 0;
    while i < values.len() {
        if values[i].is_some() {
            i += 1;
            continue;
        }
        let start = i;
        while i < values.len() && values[i].is_none() {
            i += 1;
        }
        let run = i - start;
        let left = start.checked_sub(1).and_then(|j| values[j]);
        let right = values.get(i).copied().flatten();
        match (left, right) {
            (Some(a), Some(b)) if run <= max_gap => {
                let span = (run + 1) as f64;
                for k in 0..run {
                    let t = (k + 1) as f64 / span;
                    out[start + k] = Some(a + (b - a) * t);
                }
            }
            (Some(_), Some(_)) => long[start..i].iter_mut().for_each(|f| *f = true),
            _ => {}
        }
    }
    (out, long)
}

/// Hourly aggregation choosing, per hour, the single 15-minute tick that
/// maximises the statewide total (earliest tick on ties). Each county takes
/// its value at that tick.
pub fn aggregate_max_concurrency(records: &[OutageRecord]) -> Result<OutageHourlyGrid> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no outage records".into()));
    }
    let mut ticks: BTreeMap<(String, i64), [Option<f64>; 4]> = BTreeMap::new();
    let mut counties: Vec<String> = Vec::new();
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for r in records {
        r.validate()?;
        let h = Hour::from_datetime(r.timestamp).0;
        lo = lo.min(h);
        hi = hi.max(h);
        ticks.entry((r.county_id.clone(), h)).or_insert([None; 4])[r.tick()] = Some(r.customers_out);
        counties.push(r.county_id.clone());
    }
    counties.sort();
    counties.dedup();
    let span = HourSpan::new(Hour(lo), (hi - lo + 1) as usize);
    let mut grid = OutageHourlyGrid::new(counties, span);

    for (hi_idx, hour) in span.iter().enumerate() {
        let per_county: Vec<Option<&[Option<f64>; 4]>> = grid
            .counties
            .iter()
            .map(|c| ticks.get(&(c.clone(), hour.0)))
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for t in 0..4 {
            let mut any = false;
            let mut sum = 0.0;
            for row in per_county.iter().flatten() {
                if let Some(v) = row[t] {
                    any = true;
                    sum += v;
                }
            }
            if any && best.is_none_or(|(_, b)| sum > b) {
                best = Some((t, sum));
            }
        }
        if let Some((t, _)) = best {
            for (c, row) in per_county.iter().enumerate() {
                grid.values[c][hi_idx] = row.and_then(|r| r[t]);
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::parse_utc;
    use proptest::prelude::*;

    fn rec(c: &str, minute: u32, v: f64) -> OutageRecord {
        OutageRecord {
            county_id: c.into(),
            timestamp: parse_utc(&format!("2021-06-01T10:{minute:02}:00Z")).unwrap(),
            customers_out: v,
        }
    }

    fn series(vals: &[Option<f64>]) -> HourlySeries {
        HourlySeries {
            hours: (0..vals.len() as i64).map(Hour).collect(),
            values: vals.to_vec(),
        }
    }

    #[test]
    fn max_concurrency_picks_state_argmax_tick() {
        let a = [1.0, 5.0, 2.0, 0.0];
        let b = [0.0, 1.0, 9.0, 0.0];
        let mut recs = Vec::new();
        for t in 0..4 {
            recs.push(rec("A", t as u32 * 15, a[t]));
            recs.push(rec("B", t as u32 * 15, b[t]));
        }
        let g = aggregate_max_concurrency(&recs).unwrap();
        assert_eq!(g.values[0][0], Some(2.0));
        assert_eq!(g.values[1][0], Some(9.0));
        assert_eq!(g.state_series()[0], Some(11.0));
    }

    #[test]
    fn constant_and_zero_ties() {
        let recs: Vec<_> = (0..4).map(|t| rec("A", t * 15, 3.0)).collect();
        assert_eq!(aggregate_max_concurrency(&recs).unwrap().values[0][0], Some(3.0));
        let mut recs: Vec<_> = (0..4).map(|t| rec("A", t * 15, 0.0)).collect();
        recs.extend((0..4).map(|t| rec("B", t * 15, 0.0)));
        let g = aggregate_max_concurrency(&recs).unwrap();
        assert_eq!(g.state_series()[0], Some(0.0));
    }

    #[test]
    fn rejects_off_grid_and_negative() {
        let mut r = rec("A", 0, 1.0);
        r.timestamp = parse_utc("2021-06-01T10:07:00Z").unwrap();
        assert!(aggregate_max_concurrency(&[r]).is_err());
        assert!(aggregate_max_concurrency(&[rec("A", 0, -1.0)]).is_err());
    }

    #[test]
    fn hour_without_ticks_is_missing() {
        let mut recs = vec![rec("A", 0, 1.0)];
        let mut late = rec("A", 0, 2.0);
        late.timestamp = parse_utc("2021-06-01T12:00:00Z").unwrap();
        recs.push(late);
        let g = aggregate_max_concurrency(&recs).unwrap();
        assert_eq!(g.span.len, 3);
        assert_eq!(g.values[0], vec![Some(1.0), None, Some(2.0)]);
    }

    #[test]
    fn fill_examples() {
        let f = fill_short_gaps(&series(&[Some(10.0), None, None, Some(16.0)]), 4).unwrap();
        assert_eq!(f.series.values, vec![Some(10.0), Some(12.0), Some(14.0), Some(16.0)]);

        let mut v = vec![Some(10.0)];
        v.extend([None; 5]);
        v.push(Some(16.0));
        let f = fill_short_gaps(&series(&v), 4).unwrap();
        assert_eq!(f.series.values, v);
        assert!(f.long_gap[1..6].iter().all(|&b| b));

        let f = fill_short_gaps(&series(&[None, Some(7.0), Some(8.0)]), 4).unwrap();
        assert_eq!(f.series.values[0], None);
        assert!(!f.long_gap[0]);
    }

    #[test]
    fn fill_rejects_non_contiguous() {
        let s = HourlySeries {
            hours: vec![Hour(0), Hour(2)],
            values: vec![Some(1.0), Some(2.0)],
        };
        assert!(matches!(fill_short_gaps(&s, 4), Err(Error::NonContiguous { index: 1 })));
    }

    proptest! {
        #[test]
        fn fill_keeps_observed_and_respects_limit(
            raw in proptest::collection::vec(proptest::option::weighted(0.6, 0.0_f64..100.0), 1..60),
            max_gap in 0_usize..6,
        ) {
            let f = fill_short_gaps(&series(&raw), max_gap).unwrap();
            let mut i = 0;
            while i < raw.len() {
                if let Some(v) = raw[i] {
                    prop_assert_eq!(f.series.values[i], Some(v));
                    i += 1;
                    continue;
                }
                let s = i;
                while i < raw.len() && raw[i].is_none() { i += 1; }
                if i - s > max_gap {
                    prop_assert!(f.series.values[s..i].iter().all(|v| v.is_none()));
                }
            }
        }

        #[test]
        fn state_total_bounded_by_county_maxima(
            vals in proptest::collection::vec(proptest::collection::vec(0.0_f64..1000.0, 4), 1..6)
        ) {
            let mut recs = Vec::new();
            for (c, ticks) in vals.iter().enumerate() {
                for (t, v) in ticks.iter().enumerate() {
                    recs.push(rec(&format!("C{c}"), t as u32 * 15, *v));
                }
            }
            let g = aggregate_max_concurrency(&recs).unwrap();
            let bound: f64 = vals.iter().map(|t| t.iter().cloned().fold(0.0, f64::max)).sum();
            prop_assert!(g.state_series()[0].unwrap() <= bound + 1e-9);
        }
    }
}
