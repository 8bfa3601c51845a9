//! Logistic regression: L1 fits by proximal Newton with coordinate descent
//! and class-weighted L2 fits by Newton's method.

use super::Design;
use crate::error::{Error, Result};
use crate::scalar::Real;

#[inline]
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus<T: Real>(z: T) -> T {
    if z > T::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit<T> {
    pub weights: Vec<T>,
    pub intercept: T,
    pub iterations: usize,
}

impl<T: Real> LogisticFit<T> {
    pub fn decision(&self, x: &[T]) -> T {
        self.intercept + x.iter().zip(&self.weights).map(|(&a, &w)| a * w).sum::<T>()
    }

    pub fn probability(&self, x: &[T]) -> T {
        sigmoid(self.decision(x))
    }
}

fn check_labels(y: &[bool], rows: usize) -> Result<()> {
    if y.len() != rows {
        return Err(Error::Shape { expected: rows, got: y.len() });
    }
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::InvalidInput("labels contain a single class".into()));
    }
    Ok(())
}

/// Mean log loss and, when requested, its gradient (w then b) for unweighted samples.
fn mean_loss_grad<T: Real>(x: &Design<T>, y: &[bool], w: &[T], b: T, grad: Option<&mut Vec<T>>) -> T {
    let n = T::from_usize_lossy(x.rows);
    let mut loss = T::zero();
    match grad {
        None => {
            for i in 0..x.rows {
                let z = b + x.row(i).iter().zip(w).map(|(&a, &c)| a * c).sum::<T>();
                loss = loss + softplus(z) - if y[i] { z } else { T::zero() };
            }
        }
        Some(out) => {
            out.clear();
            out.resize(x.cols + 1, T::zero());
            for i in 0..x.rows {
                let r = x.row(i);
                let z = b + r.iter().zip(w).map(|(&a, &c)| a * c).sum::<T>();
                let yi = if y[i] { T::one() } else { T::zero() };
                loss = loss + softplus(z) - yi * z;
                let d = sigmoid(z) - yi;
                for (g, &a) in out.iter_mut().zip(r) {
                    *g = *g + d * a;
                }
                out[x.cols] = out[x.cols] + d;
            }
            for g in out.iter_mut() {
                *g = *g / n;
            }
        }
    }
    loss / n
}

#[inline]
fn soft_threshold<T: Real>(v: T, t: T) -> T {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        T::zero()
    }
}

/// Minimises `mean log loss + lambda·‖w‖₁` (intercept unpenalised) by
/// proximal Newton: each outer step solves the quadratic model by cyclic
/// coordinate descent, then backtracks. Stops when the predicted decrease
/// is negligible or after `max_iter` outer steps.
pub fn fit_l1_logistic<T: Real>(x: &Design<T>, y: &[bool], lambda: T, max_iter: usize) -> Result<LogisticFit<T>> {
    fit_l1_logistic_from(x, y, lambda, max_iter, None)
}

/// [`fit_l1_logistic`] started from `init` (warm start along a λ path).
pub fn fit_l1_logistic_from<T: Real>(
    x: &Design<T>,
    y: &[bool],
    lambda: T,
    max_iter: usize,
    init: Option<&LogisticFit<T>>,
) -> Result<LogisticFit<T>> {
    check_labels(y, x.rows)?;
    let d = x.cols;
    let m = d + 1;
    let n = T::from_usize_lossy(x.rows);
    let l1 = |w: &[T]| lambda * w.iter().map(|v| v.abs()).sum::<T>();
    let (mut w, mut b) = match init {
        Some(f) if f.weights.len() == d => (f.weights.clone(), f.intercept),
        _ => {
            let pos = y.iter().filter(|&&v| v).count();
            let p0 = T::from_usize_lossy(pos) / T::from_usize_lossy(y.len());
            (vec![T::zero(); d], (p0 / (T::one() - p0)).ln())
        }
    };
    let mut f = mean_loss_grad(x, y, &w, b, None);
    let mut g = vec![T::zero(); m];
    let mut h = vec![T::zero(); m * m];
    let mut xi = vec![T::one(); m];
    for it in 0..max_iter {
        // gradient and Hessian of the mean loss, intercept last
        g.iter_mut().for_each(|v| *v = T::zero());
        h.iter_mut().for_each(|v| *v = T::zero());
        for i in 0..x.rows {
            let r = x.row(i);
            xi[..d].copy_from_slice(r);
            let z = b + r.iter().zip(&w).map(|(&a, &c)| a * c).sum::<T>();
            let p = sigmoid(z);
            let dv = p - if y[i] { T::one() } else { T::zero() };
            let hv = p * (T::one() - p);
            for a in 0..m {
                g[a] = g[a] + dv * xi[a];
                let ha = hv * xi[a];
                let row = &mut h[a * m..a * m + a + 1];
                for (hc, &xc) in row.iter_mut().zip(&xi[..=a]) {
                    *hc = *hc + ha * xc;
                }
            }
        }
        for a in 0..m {
            g[a] = g[a] / n;
            for c in 0..=a {
                let v = h[a * m + c] / n;
                h[a * m + c] = v;
                h[c * m + a] = v;
            }
        }
        // coordinate descent on the quadratic model
        let mut delta = vec![T::zero(); m];
        let mut hd = vec![T::zero(); m];
        for _ in 0..1000 {
            let mut max_change = T::zero();
            for a in 0..m {
                let haa = h[a * m + a];
                if !(haa > T::lit(1e-300)) {
                    continue;
                }
                let ga = g[a] + hd[a];
                let next = if a == d {
                    delta[a] - ga / haa
                } else {
                    soft_threshold(w[a] + delta[a] - ga / haa, lambda / haa) - w[a]
                };
                let change = next - delta[a];
                if change != T::zero() {
                    for c in 0..m {
                        hd[c] = hd[c] + h[c * m + a] * change;
                    }
                    delta[a] = next;
                    max_change = max_change.max(change.abs() * haa.sqrt());
                }
            }
            if max_change < T::lit(1e-13) {
                break;
            }
        }
        let trial = |t: T| -> (Vec<T>, T) { ((0..d).map(|j| w[j] + t * delta[j]).collect(), b + t * delta[d]) };
        let (full_w, _) = trial(T::one());
        let predicted = g.iter().zip(&delta).map(|(&a, &c)| a * c).sum::<T>() + l1(&full_w) - l1(&w);
        let obj = f + l1(&w);
        if !(predicted < -T::lit(1e-13) * (T::one() + obj.abs())) {
            return Ok(LogisticFit { weights: w, intercept: b, iterations: it + 1 });
        }
        let mut t = T::one();
        loop {
            let (nw, nb) = trial(t);
            let nf = mean_loss_grad(x, y, &nw, nb, None);
            if nf + l1(&nw) <= obj + T::lit(0.25) * t * predicted || t < T::lit(1e-10) {
                w = nw;
                b = nb;
                f = nf;
                break;
            }
            t = t * T::lit(0.5);
        }
    }
    Ok(LogisticFit { weights: w, intercept: b, iterations: max_iter })
}

/// Minimises `Σ sᵢ·logloss + ‖w‖²/(2C)` with per-class sample weights by a
/// damped Newton method until the gradient norm is below `tol`.
pub fn fit_l2_logistic<T: Real>(
    x: &Design<T>,
    y: &[bool],
    class_weights: [T; 2],
    c: T,
    tol: T,
    max_iter: usize,
) -> Result<LogisticFit<T>> {
    check_labels(y, x.rows)?;
    if !(c > T::zero()) {
        return Err(Error::InvalidInput(format!("C must be positive, got {c}")));
    }
    let d = x.cols;
    let m = d + 1;
    let inv_c = T::one() / c;
    let sw = |i: usize| if y[i] { class_weights[1] } else { class_weights[0] };
    let objective = |w: &[T], b: T| -> T {
        let mut f = w.iter().map(|&v| v * v).sum::<T>() * inv_c / T::lit(2.0);
        for i in 0..x.rows {
            let z = b + x.row(i).iter().zip(w).map(|(&a, &c)| a * c).sum::<T>();
            let yi = if y[i] { T::one() } else { T::zero() };
            f = f + sw(i) * (softplus(z) - yi * z);
        }
        f
    };
    let mut w = vec![T::zero(); d];
    let mut b = T::zero();
    let mut gnorm = T::infinity();
    for it in 0..max_iter {
        let mut g = vec![T::zero(); m];
        let mut h = crate::linalg::Matrix::zeros(m);
        for i in 0..x.rows {
            let r = x.row(i);
            let z = b + r.iter().zip(&w).map(|(&a, &c)| a * c).sum::<T>();
            let p = sigmoid(z);
            let yi = if y[i] { T::one() } else { T::zero() };
            let s = sw(i);
            let dl = s * (p - yi);
            let dd = s * p * (T::one() - p);
            for j in 0..m {
                let xj = if j < d { r[j] } else { T::one() };
                g[j] = g[j] + dl * xj;
                for k in 0..=j {
                    let xk = if k < d { r[k] } else { T::one() };
                    h.add_to(j, k, dd * xj * xk);
                }
            }
        }
        for j in 0..d {
            g[j] = g[j] + w[j] * inv_c;
            h.add_to(j, j, inv_c);
        }
        for j in 0..m {
            for k in 0..j {
                h.set(k, j, h.get(j, k));
            }
        }
        gnorm = g.iter().map(|&v| v * v).sum::<T>().sqrt();
        if gnorm < tol {
            return Ok(LogisticFit { weights: w, intercept: b, iterations: it });
        }
        // tiny ridge on the intercept keeps the Hessian invertible on separable data
        h.add_to(d, d, T::lit(1e-12));
        let Some(dir) = crate::linalg::solve(&h, &g) else {
            return Err(Error::Convergence { iterations: it, grad_norm: gnorm.as_f64() });
        };
        let f0 = objective(&w, b);
        let slope = g.iter().zip(&dir).map(|(&a, &c)| a * c).sum::<T>();
        // near the optimum the predicted decrease drops below the rounding
        // level of the objective; a full Newton step is taken there
        let resolvable = slope.abs() > T::epsilon() * f0.abs() * T::lit(1e3);
        let mut step = T::one();
        loop {
            let nw: Vec<T> = (0..d).map(|j| w[j] - step * dir[j]).collect();
            let nb = b - step * dir[d];
            if !resolvable || objective(&nw, nb) <= f0 - T::lit(1e-4) * step * slope || step < T::lit(1e-10) {
                w = nw;
                b = nb;
                break;
            }
            step = step * T::lit(0.5);
        }
    }
    Err(Error::Convergence { iterations: max_iter, grad_norm: gnorm.as_f64() })
}

/// Average precision: Σ (Rₖ − Rₖ₋₁)·Pₖ over score thresholds, ties grouped.
pub fn average_precision<T: Real>(scores: &[T], labels: &[bool]) -> Option<T> {
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return None;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut ap = T::zero();
    let mut prev_recall = T::zero();
    let mut k = 0;
    while k < idx.len() {
        let s = scores[idx[k]];
        while k < idx.len() && scores[idx[k]] == s {
            if labels[idx[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let recall = T::from_usize_lossy(tp) / T::from_usize_lossy(pos);
        let precision = T::from_usize_lossy(tp) / T::from_usize_lossy(tp + fp);
        ap = ap + (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Some(ap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_design(n: usize, d: usize, signal: usize, seed: u64) -> (Design<f64>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let row: Vec<f64> = (0..d).map(|_| rng.gen()).collect();
            y.push(row[signal] > 0.5);
            data.extend(row);
        }
        (Design::new(n, d, data).unwrap(), y)
    }

    #[test]
    fn l1_picks_separating_feature() {
        let (x, y) = noisy_design(400, 6, 3, 1);
        let fit = fit_l1_logistic(&x, &y, 0.05, 5000).unwrap();
        let nz: Vec<usize> = (0..6).filter(|&j| fit.weights[j].abs() > 1e-8).collect();
        assert_eq!(nz, vec![3]);
        let big = fit_l1_logistic(&x, &y, 1e6, 5000).unwrap();
        assert!(big.weights.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn l1_solution_satisfies_kkt() {
        // correlated columns, labels noisy in two of them
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (n, d) = (600, 8);
        let mut data = Vec::with_capacity(n * d);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let base: f64 = rng.gen();
            let row: Vec<f64> = (0..d).map(|j| base * (j as f64 / d as f64) + rng.gen::<f64>()).collect();
            y.push(row[1] + 0.5 * row[5] + 0.4 * rng.gen::<f64>() > 1.0);
            data.extend(row);
        }
        let x = Design::new(n, d, data).unwrap();
        for lambda in [0.002, 0.01, 0.05] {
            let fit = fit_l1_logistic(&x, &y, lambda, 500).unwrap();
            let mut g = vec![0.0; d + 1];
            mean_loss_grad(&x, &y, &fit.weights, fit.intercept, Some(&mut g));
            assert!(g[d].abs() < 1e-6, "intercept gradient {}", g[d]);
            for j in 0..d {
                let w = fit.weights[j];
                if w == 0.0 {
                    assert!(g[j].abs() <= lambda + 1e-6, "λ={lambda} j={j} g={}", g[j]);
                } else {
                    assert!((g[j] + lambda * w.signum()).abs() < 1e-6, "λ={lambda} j={j} g={}", g[j]);
                }
            }
        }
    }

    #[test]
    fn warm_start_reaches_same_optimum() {
        let (x, y) = noisy_design(300, 5, 2, 4);
        let cold = fit_l1_logistic(&x, &y, 0.01, 500).unwrap();
        let from = fit_l1_logistic(&x, &y, 0.05, 500).unwrap();
        let warm = fit_l1_logistic_from(&x, &y, 0.01, 500, Some(&from)).unwrap();
        for (a, b) in cold.weights.iter().zip(&warm.weights) {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn l2_separable_recall() {
        let x = Design::new(6, 1, vec![0.0, 0.1, 0.2, 0.8, 0.9, 1.0]).unwrap();
        let y = [false, false, false, true, true, true];
        let fit = fit_l2_logistic(&x, &y, [1.0, 1.0], 10.0, 1e-6, 200).unwrap();
        let recall = (3..6).filter(|&i| fit.probability(x.row(i)) >= 0.5).count();
        assert_eq!(recall, 3);
    }

    #[test]
    fn heavy_positive_weight_predicts_positive() {
        let x = Design::new(4, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let y = [false, true, false, true];
        let fit = fit_l2_logistic(&x, &y, [1.0, 1e6], 1.0, 1e-6, 500).unwrap();
        assert!((0..4).all(|i| fit.probability(x.row(i)) > 0.5));
    }

    #[test]
    fn independent_labels_give_base_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let data: Vec<f64> = (0..n * 2).map(|_| rng.gen()).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < 0.2).collect();
        let x = Design::new(n, 2, data).unwrap();
        let fit = fit_l2_logistic(&x, &y, [1.0, 5.0], 1.0, 1e-6, 100).unwrap_or_else(|e| panic!("{e}"));
        let rate = 0.2 * 5.0 / (0.2 * 5.0 + 0.8);
        let p = fit.probability(&[0.5, 0.5]);
        assert!((p - rate).abs() < 0.02, "{p} vs {rate}");
        assert!(fit.weights.iter().all(|w| w.abs() < 0.2));
    }

    #[test]
    fn single_class_rejected() {
        let x = Design::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(fit_l1_logistic(&x, &[true, true], 0.1, 10).is_err());
        assert!(fit_l2_logistic(&x, &[false, false], [1.0, 1.0], 1.0, 1e-6, 10).is_err());
    }

    #[test]
    fn average_precision_examples() {
        assert_eq!(average_precision(&[0.9, 0.8, 0.1], &[true, true, false]), Some(1.0));
        let ap = average_precision(&[0.9, 0.8, 0.7], &[false, true, true]).unwrap();
        assert!((ap as f64 - (0.5 * 0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(average_precision(&[0.1], &[false]), None);
    }
}
