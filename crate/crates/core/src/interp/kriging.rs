//! Ordinary and universal kriging in semivariogram form.

use std::collections::HashMap;

use super::{KrigingConfig, KrigingMethod, Observation, SphericalModel};
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Real;
use crate::spatial::{Point, SpatialIndex};
use crate::time::Hour;

/// Interpolated values for one parameter at one hour, aligned with `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrigedField<T> {
    pub parameter: String,
    pub hour: Option<Hour>,
    pub targets: Vec<Point<T>>,
    pub values: Vec<Option<T>>,
    pub variances: Vec<Option<T>>,
    /// In-radius stations used per target.
    pub neighbors: Vec<usize>,
    /// Diagonal jitter had to be added to the system.
    pub regularized: Vec<bool>,
    pub overdrafted: Vec<bool>,
    /// Method actually solved (universal falls back to ordinary for small or collinear sets).
    pub method_used: Vec<Option<KrigingMethod>>,
}

impl<T: Real> KrigedField<T> {
    pub fn empty(targets: &[Point<T>]) -> Self {
        let n = targets.len();
        KrigedField {
            parameter: String::new(),
            hour: None,
            targets: targets.to_vec(),
            values: vec![None; n],
            variances: vec![None; n],
            neighbors: vec![0; n],
            regularized: vec![false; n],
            overdrafted: vec![false; n],
            method_used: vec![None; n],
        }
    }

    pub fn with_label(mut self, parameter: &str, hour: Hour) -> Self {
        self.parameter = parameter.to_string();
        self.hour = Some(hour);
        self
    }
}

struct Factored<T> {
    lu: Lu<T>,
    method: KrigingMethod,
    regularized: bool,
    centre: Point<T>,
    scale: T,
}

const UK_MIN_STATIONS: usize = 4;

fn build_system<T: Real>(
    pts: &[Point<T>],
    model: &SphericalModel<T>,
    universal: bool,
    centre: Point<T>,
    scale: T,
    jitter: T,
) -> Matrix<T> {
    let n = pts.len();
    let extra = if universal { 3 } else { 1 };
    let mut a = Matrix::zeros(n + extra);
    for i in 0..n {
        for j in 0..n {
            let g = if i == j { -jitter } else { model.gamma(pts[i].dist(&pts[j])) };
            a.set(i, j, g);
        }
        a.set(i, n, T::one());
        a.set(n, i, T::one());
        if universal {
            let xs = (pts[i].x - centre.x) / scale;
            let ys = (pts[i].y - centre.y) / scale;
            a.set(i, n + 1, xs);
            a.set(n + 1, i, xs);
            a.set(i, n + 2, ys);
            a.set(n + 2, i, ys);
        }
    }
    a
}

fn factor_set<T: Real>(pts: &[Point<T>], model: &SphericalModel<T>, cfg: &KrigingConfig) -> Option<Factored<T>> {
    let n = pts.len();
    let scale = T::lit(cfg.maxlag);
    let centre = Point::new(
        pts.iter().map(|p| p.x).sum::<T>() / T::from_usize_lossy(n),
        pts.iter().map(|p| p.y).sum::<T>() / T::from_usize_lossy(n),
    );
    let tol = T::epsilon() * T::lit(100.0);
    let healthy = |lu: &Lu<T>| lu.min_rel_pivot > tol;
    if cfg.method == KrigingMethod::Universal && n >= UK_MIN_STATIONS {
        let a = build_system(pts, model, true, centre, scale, T::zero());
        if let Some(lu) = Lu::factor(&a).filter(healthy) {
            return Some(Factored { lu, method: KrigingMethod::Universal, regularized: false, centre, scale });
        }
    }
    let a = build_system(pts, model, false, centre, scale, T::zero());
    if let Some(lu) = Lu::factor(&a).filter(healthy) {
        return Some(Factored { lu, method: KrigingMethod::Ordinary, regularized: false, centre, scale });
    }
    let mut jitter = T::lit(1e-10) * model.sill();
    for _ in 0..4 {
        let a = build_system(pts, model, false, centre, scale, jitter);
        if let Some(lu) = Lu::factor(&a) {
            return Some(Factored { lu, method: KrigingMethod::Ordinary, regularized: true, centre, scale });
        }
        jitter = jitter * T::lit(1e3);
    }
    None
}

/// Kriges every target from the stations within `cfg.maxlag` of it. Targets
/// with no in-radius station stay missing. Factorisations are shared between
/// targets that see the same station set.
pub fn krige<T: Real>(
    obs: &[Observation<T>],
    targets: &[Point<T>],
    model: &SphericalModel<T>,
    cfg: &KrigingConfig,
) -> Result<KrigedField<T>> {
    if obs.len() >= 2 && obs.iter().all(|o| o.point == obs[0].point) {
        return Err(Error::Degenerate("all stations share the same coordinates".into()));
    }
    if targets.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::InvalidInput("non-finite target coordinates".into()));
    }
    let points: Vec<Point<T>> = obs.iter().map(|o| o.point).collect();
    let index = SpatialIndex::new(&points);
    let radius = T::lit(cfg.maxlag);
    let mut field = KrigedField::empty(targets);
    let mut cache: HashMap<Vec<usize>, Option<Factored<T>>> = HashMap::new();
    for (t, target) in targets.iter().enumerate() {
        let mut ids: Vec<usize> = index.within(*target, radius).into_iter().map(|(i, _)| i).collect();
        field.neighbors[t] = ids.len();
        if ids.is_empty() {
            continue;
        }
        ids.sort_unstable();
        let entry = cache.entry(ids.clone()).or_insert_with(|| {
            let pts: Vec<Point<T>> = ids.iter().map(|&i| points[i]).collect();
            factor_set(&pts, model, cfg)
        });
        let Some(f) = entry.as_ref() else {
            return Err(Error::Numeric(format!("kriging system singular at target {t}")));
        };
        let n = ids.len();
        let g0: Vec<T> = ids.iter().map(|&i| model.gamma(points[i].dist(target))).collect();
        let mut b = g0.clone();
        b.push(T::one());
        if f.method == KrigingMethod::Universal {
            b.push((target.x - f.centre.x) / f.scale);
            b.push((target.y - f.centre.y) / f.scale);
        }
        let sol = f.lu.solve(&b);
        if sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite kriging weights at target {t}")));
        }
        let value: T = (0..n).map(|k| sol[k] * obs[ids[k]].value).sum();
        let variance: T = (0..n).map(|k| sol[k] * g0[k]).sum::<T>() + (n..b.len()).map(|k| sol[k] * b[k]).sum::<T>();
        field.values[t] = Some(value);
        field.variances[t] = Some(variance.max(T::zero()));
        field.regularized[t] = f.regularized;
        field.method_used[t] = Some(f.method);
    }
    Ok(field)
}

/// Ordinary-kriging weights for one target.
#[cfg(test)]
fn ok_weights<T: Real>(pts: &[Point<T>], target: Point<T>, model: &SphericalModel<T>) -> Option<Vec<T>> {
    let f = factor_set(pts, model, &KrigingConfig::ordinary(1.0))?;
    let mut b: Vec<T> = pts.iter().map(|p| model.gamma(p.dist(&target))).collect();
    b.push(T::one());
    let mut sol = f.lu.solve(&b);
    sol.truncate(pts.len());
    Some(sol)
}
