//! Empirical semivariogram binning and spherical model fitting.

use serde::{Deserialize, Serialize};

use super::{BinRule, KrigingConfig, Observation};
use crate::error::{Error, Result};
use crate::scalar::{quantile_sorted, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVariogram<T> {
    /// Mean pair distance per retained bin (m).
    pub bin_lags: Vec<T>,
    pub semivariances: Vec<T>,
    pub pair_counts: Vec<usize>,
    pub maxlag: T,
}

impl<T: Real> EmpiricalVariogram<T> {
    pub fn len(&self) -> usize {
        self.bin_lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bin_lags.is_empty()
    }
}

/// Spherical variogram `γ(h) = c0 + c·(1.5 h/a − 0.5 (h/a)³)` for `0 < h < a`,
/// `c0 + c` beyond the range, and `γ(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalModel<T> {
    pub nugget: T,
    pub psill: T,
    pub range: T,
}

impl<T: Real> SphericalModel<T> {
    pub fn new(nugget: T, psill: T, range: T) -> Result<Self> {
        if !(nugget >= T::zero()) || !(psill >= T::zero()) || !(range > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "spherical model needs nugget ≥ 0, psill ≥ 0, range > 0 (got {nugget}, {psill}, {range})"
            )));
        }
        Ok(SphericalModel { nugget, psill, range })
    }

    pub fn sill(&self) -> T {
        self.nugget + self.psill
    }

    #[inline]
    pub fn gamma(&self, h: T) -> T {
        if h <= T::zero() {
            return T::zero();
        }
        self.nugget + self.psill * shape(h / self.range)
    }
}

#[inline]
fn shape<T: Real>(r: T) -> T {
    if r >= T::one() {
        T::one()
    } else {
        T::lit(1.5) * r - T::lit(0.5) * r * r * r
    }
}

fn bin_count<T: Real>(rule: BinRule, n_lags: usize, dists: &[T], maxlag: T) -> usize {
    match rule {
        BinRule::Fixed => n_lags.max(1),
        BinRule::Sturges => ((dists.len() as f64).log2().ceil() as usize + 1).max(1),
        BinRule::Fd => {
            let mut sorted = dists.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
            let width = T::lit(2.0) * iqr * T::from_usize_lossy(sorted.len()).powf(T::lit(-1.0 / 3.0));
            if width <= T::zero() {
                1
            } else {
                (maxlag / width).ceil().to_usize().unwrap_or(1).clamp(1, 256)
            }
        }
    }
}

/// Bins all station pairs within `cfg.maxlag` and returns `½·mean((zi − zj)²)` per non-empty bin.
pub fn fit_empirical_variogram<T: Real>(obs: &[Observation<T>], cfg: &KrigingConfig) -> Result<EmpiricalVariogram<T>> {
    if obs.len() < 2 {
        return Err(Error::NotEnoughStations { needed: 2, got: obs.len() });
    }
    let maxlag = T::lit(cfg.maxlag);
    let mut pairs: Vec<(T, T)> = Vec::new();
    for i in 0..obs.len() {
        for j in (i + 1)..obs.len() {
            let d = obs[i].point.dist(&obs[j].point);
            if d <= maxlag {
                let dz = obs[i].value - obs[j].value;
                pairs.push((d, T::lit(0.5) * dz * dz));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::NotEnoughStations { needed: 2, got: 0 });
    }
    let dists: Vec<T> = pairs.iter().map(|p| p.0).collect();
    let n_bins = bin_count(cfg.bin_rule, cfg.n_lags, &dists, maxlag);
    let width = maxlag / T::from_usize_lossy(n_bins);
    let mut sum_d = vec![T::zero(); n_bins];
    let mut sum_g = vec![T::zero(); n_bins];
    let mut count = vec![0usize; n_bins];
    for (d, g) in pairs {
        let b = if width > T::zero() {
            (d / width).floor().to_usize().unwrap_or(0).min(n_bins - 1)
        } else {
            0
        };
        sum_d[b] = sum_d[b] + d;
        sum_g[b] = sum_g[b] + g;
        count[b] += 1;
    }
    let mut ev = EmpiricalVariogram {
        bin_lags: Vec::new(),
        semivariances: Vec::new(),
        pair_counts: Vec::new(),
        maxlag,
    };
    for b in 0..n_bins {
        if count[b] > 0 {
            let n = T::from_usize_lossy(count[b]);
            ev.bin_lags.push(sum_d[b] / n);
            ev.semivariances.push(sum_g[b] / n);
            ev.pair_counts.push(count[b]);
        }
    }
    Ok(ev)
}

/// Weighted (by pair count) least squares for nugget and partial sill at a fixed range,
/// with both coefficients constrained to be non-negative. Returns `(c0, c, sse)`.
fn fit_linear_part<T: Real>(ev: &EmpiricalVariogram<T>, range: T) -> (T, T, T) {
    let phi: Vec<T> = ev.bin_lags.iter().map(|&h| shape(h / range)).collect();
    let w: Vec<T> = ev.pair_counts.iter().map(|&n| T::from_usize_lossy(n)).collect();
    let g = &ev.semivariances;
    let sse = |c0: T, c: T| -> T {
        (0..g.len())
            .map(|i| {
                let r = g[i] - c0 - c * phi[i];
                w[i] * r * r
            })
            .sum()
    };
    let (mut sw, mut sp, mut spp, mut sg, mut spg) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for i in 0..g.len() {
        sw = sw + w[i];
        sp = sp + w[i] * phi[i];
        spp = spp + w[i] * phi[i] * phi[i];
        sg = sg + w[i] * g[i];
        spg = spg + w[i] * phi[i] * g[i];
    }
    let mut candidates: Vec<(T, T)> = vec![(T::zero(), T::zero())];
    let det = sw * spp - sp * sp;
    if det.abs() > T::epsilon() * sw * spp {
        let c0 = (spp * sg - sp * spg) / det;
        let c = (sw * spg - sp * sg) / det;
        if c0 >= T::zero() && c >= T::zero() {
            candidates.push((c0, c));
        }
    }
    if spp > T::zero() {
        candidates.push((T::zero(), (spg / spp).max(T::zero())));
    }
    if sw > T::zero() {
        candidates.push(((sg / sw).max(T::zero()), T::zero()));
    }
    candidates
        .into_iter()
        .map(|(c0, c)| (c0, c, sse(c0, c)))
        .fold(None, |best: Option<(T, T, T)>, x| match best {
            Some(b) if b.2 <= x.2 => Some(b),
            _ => Some(x),
        })
        .expect("at least one candidate")
}

/// Weighted least-squares spherical fit. The range is searched on
/// `[min lag, 2·maxlag]` by a grid scan refined with golden-section search.
pub fn fit_spherical_model<T: Real>(ev: &EmpiricalVariogram<T>) -> Result<SphericalModel<T>> {
    if ev.len() < 3 {
        return Err(Error::TooFewBins { got: ev.len() });
    }
    let lo = ev.bin_lags.iter().copied().fold(T::infinity(), T::min).max(T::lit(1e-9));
    let hi = (T::lit(2.0) * ev.maxlag).max(lo * T::lit(1.000001));
    let objective = |a: T| fit_linear_part(ev, a).2;

    const GRID: usize = 400;
    let step = (hi - lo) / T::from_usize_lossy(GRID);
    let grid: Vec<T> = (0..=GRID).map(|k| lo + step * T::from_usize_lossy(k)).collect();
    let vals: Vec<T> = grid.iter().map(|&a| objective(a)).collect();
    let mut best = 0;
    for k in 1..vals.len() {
        if vals[k] < vals[best] {
            best = k;
        }
    }
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID)];
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if (b - a) <= T::lit(1e-12) * (T::one() + b.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        }
    }
    let mut range = if f1 <= f2 { x1 } else { x2 };
    if vals[best] < objective(range) {
        range = grid[best];
    }
    let range = range.max(lo).min(hi);
    let (c0, c, _) = fit_linear_part(ev, range);
    SphericalModel::new(c0, c, range)
}

/// Where a model used for one hour came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelSource {
    Fitted,
    PreviousHour,
    Default,
}

/// Model used when neither the current nor any previous hour could be fitted.
pub fn default_model<T: Real>(obs: &[Observation<T>], maxlag: T) -> SphericalModel<T> {
    let n = obs.len();
    let var = if n >= 2 {
        let m = obs.iter().map(|o| o.value).sum::<T>() / T::from_usize_lossy(n);
        obs.iter().map(|o| (o.value - m) * (o.value - m)).sum::<T>() / T::from_usize_lossy(n - 1)
    } else {
        T::zero()
    };
    SphericalModel {
        nugget: T::zero(),
        psill: var,
        range: maxlag / T::lit(2.0),
    }
}

/// Ensures a strictly positive sill so the kriging system is well posed.
/// A flat (zero-sill) field takes a unit partial sill; predictions then
/// depend only on geometry, which is exact for a constant field.
pub fn usable_model<T: Real>(m: SphericalModel<T>) -> SphericalModel<T> {
    if m.sill() > T::zero() && m.sill().is_finite() {
        m
    } else {
        SphericalModel {
            nugget: T::zero(),
            psill: T::one(),
            range: m.range,
        }
    }
}

/// Resolves per-hour fit results in time order: failed hours reuse the most
/// recent successful model, else the default model.
pub fn resolve_fallbacks<T: Real>(
    fits: Vec<Result<SphericalModel<T>>>,
    defaults: impl Fn(usize) -> SphericalModel<T>,
) -> Vec<(SphericalModel<T>, ModelSource)> {
    let mut last: Option<SphericalModel<T>> = None;
    fits.into_iter()
        .enumerate()
        .map(|(i, f)| match f {
            Ok(m) => {
                last = Some(m);
                (m, ModelSource::Fitted)
            }
            Err(_) => match last {
                Some(m) => (m, ModelSource::PreviousHour),
                None => (defaults(i), ModelSource::Default),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::{Drift, KrigingMethod};
    use crate::spatial::Point;

    fn cfg(maxlag: f64, rule: BinRule, n_lags: usize) -> KrigingConfig {
        KrigingConfig {
            method: KrigingMethod::Ordinary,
            maxlag,
            n_lags,
            bin_rule: rule,
            drift: Drift::None,
        }
    }

    fn ob(x: f64, y: f64, v: f64) -> Observation<f64> {
        Observation { point: Point::new(x, y), value: v }
    }

    #[test]
    fn two_station_single_bin() {
        let ev = fit_empirical_variogram(&[ob(0.0, 0.0, 0.0), ob(3.0, 4.0, 2.0)], &cfg(10.0, BinRule::Fixed, 4)).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev.semivariances[0], 2.0);
        assert_eq!(ev.bin_lags[0], 5.0);
        assert_eq!(ev.pair_counts[0], 1);
    }

    #[test]
    fn constant_field_zero_semivariance() {
        let obs: Vec<_> = (0..8).map(|i| ob(i as f64 * 3.0, (i * i) as f64, 7.5)).collect();
        for rule in [BinRule::Fixed, BinRule::Sturges, BinRule::Fd] {
            let ev = fit_empirical_variogram(&obs, &cfg(100.0, rule, 5)).unwrap();
            assert!(ev.semivariances.iter().all(|&g| g == 0.0));
            assert!(ev.bin_lags.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn pairs_beyond_maxlag_error() {
        let r = fit_empirical_variogram(&[ob(0.0, 0.0, 1.0), ob(500.0, 0.0, 2.0)], &cfg(100.0, BinRule::Fixed, 4));
        assert!(matches!(r, Err(Error::NotEnoughStations { .. })));
        assert!(fit_empirical_variogram(&[ob(0.0, 0.0, 1.0)], &cfg(100.0, BinRule::Fixed, 4)).is_err());
    }

    #[test]
    fn sturges_bin_count() {
        // 6 stations -> 15 pairs -> ceil(log2 15) + 1 = 5 bins
        assert_eq!(bin_count(BinRule::Sturges, 0, &[1.0_f64; 15], 10.0), 5);
    }

    #[test]
    fn spherical_values() {
        let m = SphericalModel::new(0.0, 10.0, 100_000.0).unwrap();
        assert!((m.gamma(50_000.0_f64) - 6.875).abs() < 1e-12);
        assert_eq!(m.gamma(100_000.0), 10.0);
        assert_eq!(m.gamma(0.0), 0.0);
        assert_eq!(m.gamma(250_000.0), 10.0);
        assert!(SphericalModel::new(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn too_few_bins_and_fallbacks() {
        let ev = EmpiricalVariogram {
            bin_lags: vec![1.0, 2.0],
            semivariances: vec![1.0, 2.0],
            pair_counts: vec![1, 1],
            maxlag: 10.0,
        };
        assert!(matches!(fit_spherical_model(&ev), Err(Error::TooFewBins { got: 2 })));
        let good = SphericalModel::new(0.0, 1.0, 5.0).unwrap();
        let dflt = SphericalModel::new(0.0, 9.0, 50.0).unwrap();
        let out = resolve_fallbacks(
            vec![Err(Error::TooFewBins { got: 0 }), Ok(good), Err(Error::TooFewBins { got: 1 })],
            |_| dflt,
        );
        assert_eq!(out[0], (dflt, ModelSource::Default));
        assert_eq!(out[1], (good, ModelSource::Fitted));
        assert_eq!(out[2], (good, ModelSource::PreviousHour));
    }

    #[test]
    fn recovers_noiseless_model() {
        let truth = SphericalModel::new(0.5, 4.0, 120_000.0).unwrap();
        let lags: Vec<f64> = (1..=15).map(|k| k as f64 * 15_000.0).collect();
        let ev = EmpiricalVariogram {
            semivariances: lags.iter().map(|&h| truth.gamma(h)).collect(),
            pair_counts: (0..lags.len()).map(|k| 5 + k).collect(),
            bin_lags: lags,
            maxlag: 250_000.0,
        };
        let fit = fit_spherical_model(&ev).unwrap();
        assert!((fit.sill() - truth.sill()).abs() / truth.sill() < 1e-3);
        assert!((fit.range - truth.range).abs() / truth.range < 1e-3);
    }

    #[test]
    fn works_in_f32() {
        let m = SphericalModel::new(0.0_f32, 10.0, 100.0).unwrap();
        assert!((m.gamma(50.0) - 6.875).abs() < 1e-5);
    }
}
