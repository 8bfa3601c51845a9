//! k-nearest inverse-distance weighting across counties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spatial::Point;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdwConfig {
    pub k: usize,
    pub p: f64,
}

impl Default for IdwConfig {
    fn default() -> Self {
        IdwConfig { k: 5, p: 2.0 }
    }
}

impl IdwConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || !(self.p > 0.0) {
            return Err(Error::Config(format!("IDW needs k ≥ 1 and p > 0 (got k={}, p={})", self.k, self.p)));
        }
        Ok(())
    }
}

/// Neighbour orderings precomputed once for a fixed set of centroids.
#[derive(Debug, Clone)]
pub struct IdwIndex<T> {
    order: Vec<Vec<(usize, T)>>,
}

impl<T: Real> IdwIndex<T> {
    pub fn new(centroids: &[Point<T>], self_excluded: bool) -> Self {
        let order = centroids
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut v: Vec<(usize, T)> = centroids
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| !(self_excluded && j == i))
                    .map(|(j, p)| (j, c.dist(p)))
                    .collect();
                v.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
                v
            })
            .collect();
        IdwIndex { order }
    }

    /// IDW over the `k` nearest neighbours that have a value. A neighbour at
    /// distance 0 returns its own value; no neighbour gives missing.
    pub fn aggregate(&self, values: &[Option<T>], cfg: &IdwConfig) -> Vec<Option<T>> {
        let p = T::lit(cfg.p);
        self.order
            .iter()
            .map(|nbrs| {
                let mut num = T::zero();
                let mut den = T::zero();
                let mut used = 0;
                for &(j, d) in nbrs {
                    let Some(z) = values[j] else { continue };
                    if d == T::zero() {
                        return Some(z);
                    }
                    let w = d.powf(-p);
                    num = num + w * z;
                    den = den + w;
                    used += 1;
                    if used == cfg.k {
                        break;
                    }
                }
                (used > 0).then(|| num / den)
            })
            .collect()
    }
}

pub fn idw_aggregate<T: Real>(values: &[Option<T>], centroids: &[Point<T>], cfg: &IdwConfig, self_excluded: bool) -> Vec<Option<T>> {
    IdwIndex::new(centroids, self_excluded).aggregate(values, cfg)
}
