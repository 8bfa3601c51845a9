//! Replacement of smoothed kriged values by nearby extreme station readings.

use serde::{Deserialize, Serialize};

use super::{KrigedField, Observation};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spatial::{Point, SpatialIndex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverdraftRule<T> {
    /// Search radius in meters.
    pub radius: T,
    pub upper: T,
    pub lower: Option<T>,
}

impl<T: Real> OverdraftRule<T> {
    pub fn new(radius: T, upper: T, lower: Option<T>) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput(format!("overdraft radius must be positive, got {radius}")));
        }
        if let Some(lo) = lower {
            if !(lo < upper) {
                return Err(Error::InvalidInput(format!("overdraft lower {lo} must be below upper {upper}")));
            }
        }
        Ok(OverdraftRule { radius, upper, lower })
    }

    pub fn breaches(&self, v: T) -> bool {
        v >= self.upper || self.lower.is_some_and(|lo| v <= lo)
    }
}

/// For each target, the nearest in-radius station whose value breaches the
/// rule replaces the kriged value and the target is marked overdrafted.
pub fn overdraft<T: Real>(mut field: KrigedField<T>, obs: &[Observation<T>], rule: &OverdraftRule<T>) -> KrigedField<T> {
    let extreme: Vec<&Observation<T>> = obs.iter().filter(|o| rule.breaches(o.value)).collect();
    if extreme.is_empty() {
        return field;
    }
    let pts: Vec<Point<T>> = extreme.iter().map(|o| o.point).collect();
    let index = SpatialIndex::new(&pts);
    for t in 0..field.targets.len() {
        if let Some(&(i, _)) = index.within(field.targets[t], rule.radius).first() {
            field.values[t] = Some(extreme[i].value);
            field.overdrafted[t] = true;
        }
    }
    field
}
