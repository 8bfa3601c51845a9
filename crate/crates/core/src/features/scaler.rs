//! Min-max scaling fitted on training rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature minimum and maximum. Missing values (NaN) are ignored when
/// fitting and pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Fits on `rows` (each of equal width). Features with no observed value get `min = max = 0`.
pub fn fit_scaler<'a>(rows: impl IntoIterator<Item = &'a [f64]>, width: usize) -> Result<ScalerParams> {
    let mut min = vec![f64::INFINITY; width];
    let mut max = vec![f64::NEG_INFINITY; width];
    let mut n = 0usize;
    for row in rows {
        if row.len() != width {
            return Err(Error::Shape { expected: width, got: row.len() });
        }
        n += 1;
        for (j, &v) in row.iter().enumerate() {
            if !v.is_nan() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("cannot fit a scaler on zero rows".into()));
    }
    for j in 0..width {
        if min[j] > max[j] {
            min[j] = 0.0;
            max[j] = 0.0;
        }
    }
    Ok(ScalerParams { min, max })
}

impl ScalerParams {
    pub fn width(&self) -> usize {
        self.min.len()
    }

    #[inline]
    pub fn scale_one(&self, j: usize, v: f64) -> f64 {
        let range = self.max[j] - self.min[j];
        if v.is_nan() {
            v
        } else if range > 0.0 {
            (v - self.min[j]) / range
        } else {
            0.0
        }
    }

    /// Scales in place; values outside the train range are not clamped.
    pub fn apply(&self, row: &mut [f64]) {
        for (j, v) in row.iter_mut().enumerate() {
            *v = self.scale_one(j, *v);
        }
    }

    /// Restriction to the given column indices.
    pub fn subset(&self, cols: &[usize]) -> ScalerParams {
        ScalerParams {
            min: cols.iter().map(|&j| self.min[j]).collect(),
            max: cols.iter().map(|&j| self.max[j]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let rows = [vec![2.0, 7.0, f64::NAN], vec![4.0, 7.0, f64::NAN]];
        let s = fit_scaler(rows.iter().map(|r| r.as_slice()), 3).unwrap();
        let mut r = vec![3.0, 7.0, f64::NAN];
        s.apply(&mut r);
        assert_eq!(r[0], 0.5);
        assert_eq!(r[1], 0.0);
        assert!(r[2].is_nan());
        assert_eq!(s.scale_one(0, 5.0), 1.5);
        assert_eq!(s.scale_one(0, 2.0), 0.0);
        assert_eq!(s.scale_one(0, 4.0), 1.0);
        assert!(fit_scaler(std::iter::empty(), 2).is_err());
    }
}
