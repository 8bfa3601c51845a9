//! Storm-driven power outage early warning: ingest, interpolation, features,
//! two-stage model and event-centric evaluation.

pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod spatial;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SphericalModel64 = interp::SphericalModel<f64>;
pub type KrigedField64 = interp::KrigedField<f64>;
pub type Point64 = spatial::Point<f64>;
