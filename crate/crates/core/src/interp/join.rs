//! Radius joins for discrete parameters and the station humidity gradient.

use super::Observation;
use crate::scalar::Real;
use crate::spatial::{Point, SpatialIndex};

/// Value reported for a target with no station in its radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinEmpty {
    Zero,
    Missing,
}

/// Max over stations within `radius` of each target. Booleans encoded as 0/1
/// make this an OR.
pub fn polygon_join<T: Real>(obs: &[Observation<T>], targets: &[Point<T>], radius: T, empty: JoinEmpty) -> Vec<Option<T>> {
    let pts: Vec<Point<T>> = obs.iter().map(|o| o.point).collect();
    let index = SpatialIndex::new(&pts);
    targets
        .iter()
        .map(|t| {
            let near = index.within(*t, radius);
            if near.is_empty() {
                match empty {
                    JoinEmpty::Zero => Some(T::zero()),
                    JoinEmpty::Missing => None,
                }
            } else {
                Some(near.iter().map(|&(i, _)| obs[i].value).fold(T::neg_infinity(), T::max))
            }
        })
        .collect()
}

/// Absolute RH difference per km to the nearest other station within
/// `radius` meters; 0 without such a neighbour. Co-located stations are
/// not treated as neighbours.
pub fn rh_gradient<T: Real>(obs: &[Observation<T>], radius: T) -> Vec<T> {
    let pts: Vec<Point<T>> = obs.iter().map(|o| o.point).collect();
    let index = SpatialIndex::new(&pts);
    (0..obs.len())
        .map(|i| {
            index
                .within(pts[i], radius)
                .into_iter()
                .find(|&(j, d)| j != i && d > T::zero())
                .map(|(j, d)| (obs[i].value - obs[j].value).abs() / (d / T::lit(1000.0)))
                .unwrap_or(T::zero())
        })
        .collect()
}
