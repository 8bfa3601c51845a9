//! Event-centric evaluation: classification and regression metrics, cMASE,
//! peak detection and matching, block bootstrap, external reconciliation and
//! autocorrelation diagnostics.

mod bootstrap;
mod classification;
mod cmase;
mod diagnostics;
mod events;
mod oe417;
mod overall;
mod report;

pub use bootstrap::{block_bootstrap, block_offsets, BootstrapConfig, BootstrapSummary, Interval};
pub use classification::{classification_metrics, pr_curve_auc, roc_auc, ClassificationMetrics, Confusion, PrCurve, PrPoint};
pub use cmase::{cmase, cmase_with_denominator, peak_neighbourhood, CmaseEntry, CmaseTable};
pub use diagnostics::{
    acf, lattice_neighbors, morans_i, morans_i_statistic, read_adjacency, write_adjacency, MoranResult, ADJACENCY_HEADER,
    DEFAULT_ACF_LAGS,
};
pub use events::{
    centered_ma, detect_events, event_prf, event_prf_counts, event_segments, match_events, DetectorConfig, Event, EventList,
    EventPrf, MatchResult,
};
pub use oe417::{delta_pct, grade, oe417_reconcile, read_external_events, Confidence, ExternalEvent, Oe417Row, EXTERNAL_HEADER};
pub use overall::{overall_metrics, seasonal_naive_mae, OverallMetrics};
pub use report::{evaluate, EvalConfig, EventsReport, GateOutcome, ModelReport, PrSummary, Report, Scope, SeriesSet, WindowRow};
