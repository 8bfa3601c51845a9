//! Meteorological wind convention: direction is where the wind blows *from*,
//! clockwise from north.

use crate::scalar::Real;

pub const KNOT_TO_MS: f64 = 0.514444;

/// Speed in knots and direction in degrees to eastward/northward components in m/s.
pub fn decompose_wind<T: Real>(speed_kt: T, theta_deg: T) -> (T, T) {
    let v = speed_kt * T::lit(KNOT_TO_MS);
    let theta = theta_deg.to_radians();
    (-v * theta.sin(), -v * theta.cos())
}

/// Inverse of [`decompose_wind`]: returns speed in m/s and direction in `[0, 360)`.
/// Calm (zero) wind reports direction 0.
pub fn recover_wind<T: Real>(u: T, v: T) -> (T, T) {
    let speed = u.hypot(v);
    if speed == T::zero() {
        return (T::zero(), T::zero());
    }
    let deg = (-u).atan2(-v).to_degrees();
    let full = T::lit(360.0);
    let mut theta = deg % full;
    if theta < T::zero() {
        theta = theta + full;
    }
    if theta >= full {
        theta = theta - full;
    }
    (speed, theta)
}
