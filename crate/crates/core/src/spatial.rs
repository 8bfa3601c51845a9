//! Planar geometry helpers: points, a local projection and a sweep index.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Point in projected planar coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &Point<T>) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Local equirectangular projection about a reference longitude/latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub lon0: f64,
    pub lat0: f64,
}

impl LocalProjection {
    /// Projection centred on the mean of the given `(lon, lat)` pairs.
    pub fn about_centroid(coords: &[(f64, f64)]) -> Self {
        let n = coords.len().max(1) as f64;
        let lon0 = coords.iter().map(|c| c.0).sum::<f64>() / n;
        let lat0 = coords.iter().map(|c| c.1).sum::<f64>() / n;
        LocalProjection { lon0, lat0 }
    }

    pub fn project(&self, lon: f64, lat: f64) -> Point<f64> {
        let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        Point::new(
            (lon - self.lon0) * k * self.lat0.to_radians().cos(),
            (lat - self.lat0) * k,
        )
    }

    pub fn unproject(&self, p: Point<f64>) -> (f64, f64) {
        let k = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        (
            self.lon0 + p.x / (k * self.lat0.to_radians().cos()),
            self.lat0 + p.y / k,
        )
    }
}

/// Points sorted by x; radius queries binary-search the x band then filter.
#[derive(Debug, Clone)]
pub struct SpatialIndex<T> {
    sorted: Vec<(Point<T>, usize)>,
}

impl<T: Real> SpatialIndex<T> {
    pub fn new(points: &[Point<T>]) -> Self {
        let mut sorted: Vec<(Point<T>, usize)> =
            points.iter().copied().enumerate().map(|(i, p)| (p, i)).collect();
        sorted.sort_by(|a, b| {
            a.0.x
                .partial_cmp(&b.0.x)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        SpatialIndex { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Indices of points with distance ≤ `radius`, sorted by (distance, index).
    pub fn within(&self, q: Point<T>, radius: T) -> Vec<(usize, T)> {
        let lo = self.sorted.partition_point(|(p, _)| p.x < q.x - radius);
        let mut out: Vec<(usize, T)> = self.sorted[lo..]
            .iter()
            .take_while(|(p, _)| p.x <= q.x + radius)
            .filter_map(|(p, i)| {
                let d = p.dist(&q);
                (d <= radius).then_some((*i, d))
            })
            .collect();
        sort_by_distance(&mut out);
        out
    }

    /// The `k` nearest points (ties by index), optionally skipping one index.
    pub fn nearest(&self, q: Point<T>, k: usize, skip: Option<usize>) -> Vec<(usize, T)> {
        let mut all: Vec<(usize, T)> = self
            .sorted
            .iter()
            .filter(|(_, i)| Some(*i) != skip)
            .map(|(p, i)| (*i, p.dist(&q)))
            .collect();
        sort_by_distance(&mut all);
        all.truncate(k);
        all
    }
}

fn sort_by_distance<T: Real>(v: &mut [(usize, T)]) {
    v.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
}
