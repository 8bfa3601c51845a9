//! Raw outage and METAR tables to aligned hourly county and station series.

pub mod io;
mod outage;
mod weather;
mod wind;

pub use outage::{aggregate_max_concurrency, fill_short_gaps, FilledSeries, HourlySeries, OutageHourlyGrid, OutageRecord};
pub use weather::{
    project_stations, resample_weather_hourly, RawWeatherRecord, StationHourly, StationMeta, WxCodes,
    FORWARD_FILL_HOURS,
};
pub use wind::{decompose_wind, recover_wind, KNOT_TO_MS};

/// Interior missing runs up to this many hours are linearly interpolated.
pub const DEFAULT_MAX_GAP_HOURS: usize = 4;
