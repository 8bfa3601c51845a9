//! Leave-one-station-out validation of the hourly kriging fit.

use serde::{Deserialize, Serialize};

use super::{default_model, fit_empirical_variogram, fit_spherical_model, krige, usable_model, KrigingConfig, Observation};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spatial::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutResult<T> {
    /// Mean over hours of the per-hour absolute error.
    pub mean: T,
    /// Sample standard deviation of the per-hour absolute error.
    pub sd: T,
    /// Root mean square error pooled over hours.
    pub rmse: T,
    pub hours: usize,
}

/// Withholds `station` and predicts it from the others for every hour in
/// `values` (`values[h][s]`, aligned with `points`). Hours where the station
/// is unobserved or no other station is in range are skipped. A failed
/// variogram fit reuses the previous hour's model, then the default model.
pub fn holdout_validate<T: Real>(
    station: usize,
    values: &[Vec<Option<T>>],
    points: &[Point<T>],
    cfg: &KrigingConfig,
) -> Result<HoldoutResult<T>> {
    if station >= points.len() {
        return Err(Error::InvalidInput(format!("station index {station} out of range")));
    }
    if values.iter().all(|row| row.get(station).copied().flatten().is_none()) {
        return Err(Error::InvalidInput(format!("station {station} has no observations in the sample")));
    }
    let mut errors = Vec::new();
    let mut last = None;
    for row in values {
        let Some(truth) = row.get(station).copied().flatten() else { continue };
        let obs: Vec<Observation<T>> = row
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != station)
            .filter_map(|(s, v)| v.map(|v| Observation::new(points[s], v)))
            .collect();
        if obs.is_empty() {
            continue;
        }
        let model = match fit_empirical_variogram(&obs, cfg).and_then(|ev| fit_spherical_model(&ev)) {
            Ok(m) => {
                last = Some(m);
                m
            }
            Err(_) => last.unwrap_or_else(|| default_model(&obs, T::lit(cfg.maxlag))),
        };
        let field = krige(&obs, &[points[station]], &usable_model(model), cfg)?;
        if let Some(pred) = field.values[0] {
            errors.push((pred - truth).abs());
        }
    }
    if errors.is_empty() {
        return Err(Error::NotEnoughStations { needed: 1, got: 0 });
    }
    let n = T::from_usize_lossy(errors.len());
    let mean = errors.iter().copied().sum::<T>() / n;
    let sd = if errors.len() > 1 {
        (errors.iter().map(|&e| (e - mean) * (e - mean)).sum::<T>() / (n - T::one())).sqrt()
    } else {
        T::zero()
    };
    let rmse = (errors.iter().map(|&e| e * e).sum::<T>() / n).sqrt();
    Ok(HoldoutResult { mean, sd, rmse, hours: errors.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_zero_error() {
        let points: Vec<Point<f64>> = (0..6).map(|i| Point::new(i as f64 * 20_000.0, (i % 2) as f64 * 15_000.0)).collect();
        let values = vec![vec![Some(4.2); 6]; 5];
        let r = holdout_validate(2, &values, &points, &KrigingConfig::ordinary(250_000.0)).unwrap();
        assert!(r.rmse < 1e-9 && r.mean < 1e-9);
        assert_eq!(r.hours, 5);
    }

    #[test]
    fn unobserved_station_rejected() {
        let points = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        let values = vec![vec![Some(1.0), None]];
        assert!(holdout_validate(1, &values, &points, &KrigingConfig::ordinary(10.0)).is_err());
    }

    #[test]
    fn isolated_station_is_harder() {
        // smooth random field: sum of cosines with ~150 km wavelength
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut points: Vec<Point<f64>> = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                points.push(Point::new(i as f64 * 25_000.0, j as f64 * 25_000.0));
            }
        }
        points.push(Point::new(300_000.0, 300_000.0));
        let isolated = points.len() - 1;
        let dense = 12;
        let hours: Vec<Vec<Option<f64>>> = (0..30)
            .map(|_| {
                let waves: Vec<(f64, f64, f64)> = (0..6)
                    .map(|_| {
                        let k = 2.0 * std::f64::consts::PI / rng.gen_range(120_000.0..200_000.0);
                        let a = rng.gen_range(0.0..std::f64::consts::TAU);
                        (k * a.cos(), k * a.sin(), rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                points
                    .iter()
                    .map(|p| Some(waves.iter().map(|w| 3.0 * (w.0 * p.x + w.1 * p.y + w.2).cos()).sum()))
                    .collect()
            })
            .collect();
        let cfg = KrigingConfig::ordinary(500_000.0);
        let d = holdout_validate(dense, &hours, &points, &cfg).unwrap();
        let i = holdout_validate(isolated, &hours, &points, &cfg).unwrap();
        assert!(i.rmse >= d.rmse, "isolated {} dense {}", i.rmse, d.rmse);
    }
}
