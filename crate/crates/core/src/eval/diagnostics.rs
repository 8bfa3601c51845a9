//! Spatial (Moran's I) and temporal (ACF) autocorrelation diagnostics.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{columns, create_csv, location, open_csv};
use crate::scalar::Real;

pub const ADJACENCY_HEADER: [&str; 2] = ["county_id", "neighbor_id"];
pub const DEFAULT_ACF_LAGS: [usize; 7] = [1, 6, 12, 18, 24, 36, 48];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoranResult {
    pub i: f64,
    pub z: f64,
    pub p: f64,
    pub permutations: usize,
}

/// Moran's I with row-standardised weights from neighbour lists.
pub fn morans_i_statistic<T: Real>(x: &[T], neighbors: &[Vec<usize>]) -> Result<T> {
    let n = x.len();
    if n < 2 || neighbors.len() != n {
        return Err(Error::Shape { expected: n.max(2), got: neighbors.len() });
    }
    let mean = x.iter().copied().sum::<T>() / T::from_usize_lossy(n);
    let z: Vec<T> = x.iter().map(|&v| v - mean).collect();
    let m2 = z.iter().map(|&v| v * v).sum::<T>();
    if !(m2 > T::zero()) {
        return Err(Error::Degenerate("Moran's I of a constant field".into()));
    }
    let mut num = T::zero();
    let mut s0 = T::zero();
    for (i, nb) in neighbors.iter().enumerate() {
        if nb.is_empty() {
            continue;
        }
        let w = T::one() / T::from_usize_lossy(nb.len());
        let lag = nb.iter().map(|&j| z[j]).sum::<T>();
        num = num + w * z[i] * lag;
        s0 = s0 + T::one();
    }
    if s0 == T::zero() {
        return Err(Error::Degenerate("no county has a neighbour".into()));
    }
    Ok(T::from_usize_lossy(n) / s0 * num / m2)
}

/// Moran's I with a one-sided permutation test in the direction of the
/// observed value relative to the permutation mean.
pub fn morans_i<T: Real>(x: &[T], neighbors: &[Vec<usize>], permutations: usize, seed: u64) -> Result<MoranResult> {
    let obs = morans_i_statistic(x, neighbors)?.as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm = x.to_vec();
    let mut draws = Vec::with_capacity(permutations);
    for _ in 0..permutations {
        perm.shuffle(&mut rng);
        draws.push(morans_i_statistic(&perm, neighbors)?.as_f64());
    }
    if draws.is_empty() {
        return Ok(MoranResult { i: obs, z: f64::NAN, p: 1.0, permutations });
    }
    let m = draws.iter().sum::<f64>() / draws.len() as f64;
    let sd = (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (draws.len() - 1).max(1) as f64).sqrt();
    let extreme = if obs >= m { draws.iter().filter(|&&d| d >= obs).count() } else { draws.iter().filter(|&&d| d <= obs).count() };
    Ok(MoranResult {
        i: obs,
        z: if sd > 0.0 { (obs - m) / sd } else { 0.0 },
        p: (1 + extreme) as f64 / (permutations + 1) as f64,
        permutations,
    })
}

/// Sample autocorrelation at each lag using the full-series mean.
pub fn acf<T: Real>(y: &[T], lags: &[usize]) -> Result<Vec<T>> {
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    if y.len() < max_lag + 2 {
        return Err(Error::InvalidInput(format!("ACF needs at least {} points, got {}", max_lag + 2, y.len())));
    }
    let mean = y.iter().copied().sum::<T>() / T::from_usize_lossy(y.len());
    let d: Vec<T> = y.iter().map(|&v| v - mean).collect();
    let den = d.iter().map(|&v| v * v).sum::<T>();
    if !(den > T::zero()) {
        return Err(Error::Degenerate("ACF of a constant series".into()));
    }
    Ok(lags.iter().map(|&l| (0..y.len() - l).map(|t| d[t] * d[t + l]).sum::<T>() / den).collect())
}

/// Neighbour lists aligned with `counties` from an edge list; edges are symmetrised.
pub fn read_adjacency(path: &Path, counties: &[String]) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<&str, usize> = counties.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut rdr = open_csv(path)?;
    let headers = rdr.headers()?.clone();
    let c = columns(path, &headers, &ADJACENCY_HEADER)?;
    let mut nb = vec![Vec::new(); counties.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let look = |s: &str| index.get(s).copied().ok_or_else(|| Error::parse(location(path, &rec), format!("unknown county `{s}`")));
        let (a, b) = (look(&rec[c[0]])?, look(&rec[c[1]])?);
        if a != b {
            nb[a].push(b);
            nb[b].push(a);
        }
    }
    for v in nb.iter_mut() {
        v.sort_unstable();
        v.dedup();
    }
    Ok(nb)
}

/// Writes each undirected edge once (`a < b` by county order).
pub fn write_adjacency(path: &Path, counties: &[String], neighbors: &[Vec<usize>]) -> Result<()> {
    let mut w = create_csv(path)?;
    w.write_record(ADJACENCY_HEADER)?;
    for (a, nb) in neighbors.iter().enumerate() {
        for &b in nb.iter().filter(|&&b| b > a) {
            w.write_record([&counties[a], &counties[b]])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rook (`queen = false`) or queen contiguity on an `rows × cols` lattice, row-major.
pub fn lattice_neighbors(rows: usize, cols: usize, queen: bool) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); rows * cols];
    for r in 0..rows as i64 {
        for c in 0..cols as i64 {
            for dr in -1..=1i64 {
                for dc in -1..=1i64 {
                    if (dr, dc) == (0, 0) || (!queen && dr != 0 && dc != 0) {
                        continue;
                    }
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 0 && cc >= 0 && rr < rows as i64 && cc < cols as i64 {
                        out[(r * cols as i64 + c) as usize].push((rr * cols as i64 + cc) as usize);
                    }
                }
            }
        }
    }
    out
}
