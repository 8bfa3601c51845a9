//! Single-step LSTM regressor (one cell step from zero state, dense output),
//! exact backprop and Adam training with early stopping.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Design;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Gate blocks within the stacked `4H` dimension, in this order.
pub const GATE_ORDER: [&str; 4] = ["i", "f", "g", "o"];

/// All trainable tensors. Gradients and Adam moments share this layout.
/// `w_ih` is `4H × n_in` and `w_hh` is `4H × H`, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<T> {
    pub n_in: usize,
    pub hidden: usize,
    pub w_ih: Vec<T>,
    pub w_hh: Vec<T>,
    pub b: Vec<T>,
    pub w_out: Vec<T>,
    pub b_out: Vec<T>,
}

impl<T: Real> LstmParams<T> {
    pub fn zeros(n_in: usize, hidden: usize) -> Self {
        let z = |n| vec![T::zero(); n];
        LstmParams {
            n_in,
            hidden,
            w_ih: z(4 * hidden * n_in),
            w_hh: z(4 * hidden * hidden),
            b: z(4 * hidden),
            w_out: z(hidden),
            b_out: z(1),
        }
    }

    /// Uniform in ±1/√n_in for input weights and ±1/√H for the rest.
    pub fn init(n_in: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut p = Self::zeros(n_in, hidden);
        let a_in = 1.0 / (n_in.max(1) as f64).sqrt();
        let a_h = 1.0 / (hidden.max(1) as f64).sqrt();
        for v in p.w_ih.iter_mut() {
            *v = T::lit(rng.gen_range(-a_in..=a_in));
        }
        for t in [&mut p.w_hh, &mut p.b, &mut p.w_out] {
            for v in t.iter_mut() {
                *v = T::lit(rng.gen_range(-a_h..=a_h));
            }
        }
        p
    }

    pub fn tensor_names() -> [&'static str; 5] {
        ["w_ih", "w_hh", "b", "w_out", "b_out"]
    }

    pub fn shapes(&self) -> [Vec<usize>; 5] {
        let h = self.hidden;
        [vec![4 * h, self.n_in], vec![4 * h, h], vec![4 * h], vec![h], vec![1]]
    }

    pub fn tensors(&self) -> [&Vec<T>; 5] {
        [&self.w_ih, &self.w_hh, &self.b, &self.w_out, &self.b_out]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<T>; 5] {
        [&mut self.w_ih, &mut self.w_hh, &mut self.b, &mut self.w_out, &mut self.b_out]
    }

    pub fn check_shapes(&self) -> Result<()> {
        for (t, s) in self.tensors().iter().zip(self.shapes()) {
            let n: usize = s.iter().product();
            if t.len() != n {
                return Err(Error::Shape { expected: n, got: t.len() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentRegressor<T> {
    pub features: Vec<String>,
    pub params: LstmParams<T>,
}

/// Activations kept for the backward pass.
struct Trace<T> {
    i: Vec<T>,
    g: Vec<T>,
    o: Vec<T>,
    tc: Vec<T>,
    h: Vec<T>,
}

#[inline]
fn sigmoid<T: Real>(z: T) -> T {
    super::logistic::sigmoid(z)
}

fn forward<T: Real>(p: &LstmParams<T>, x: &[T]) -> (T, Trace<T>) {
    let hn = p.hidden;
    let pre = |row: usize| -> T {
        let w = &p.w_ih[row * p.n_in..(row + 1) * p.n_in];
        p.b[row] + w.iter().zip(x).map(|(&a, &b)| a * b).sum::<T>()
    };
    let mut t = Trace { i: Vec::with_capacity(hn), g: Vec::with_capacity(hn), o: Vec::with_capacity(hn), tc: Vec::with_capacity(hn), h: Vec::with_capacity(hn) };
    let mut y = p.b_out[0];
    for k in 0..hn {
        // forget gate multiplies a zero cell state and drops out
        let i = sigmoid(pre(k));
        let g = pre(2 * hn + k).tanh();
        let o = sigmoid(pre(3 * hn + k));
        let tc = (i * g).tanh();
        let h = o * tc;
        y = y + p.w_out[k] * h;
        t.i.push(i);
        t.g.push(g);
        t.o.push(o);
        t.tc.push(tc);
        t.h.push(h);
    }
    (y, t)
}

/// One cell step from zero hidden and cell state followed by the dense output.
pub fn cell_forward<T: Real>(p: &LstmParams<T>, x: &[T]) -> Result<T> {
    if x.len() != p.n_in {
        return Err(Error::Shape { expected: p.n_in, got: x.len() });
    }
    Ok(forward(p, x).0)
}

/// Accumulates `dy · ∂ŷ/∂θ` into `grad`.
fn backward<T: Real>(p: &LstmParams<T>, x: &[T], t: &Trace<T>, dy: T, grad: &mut LstmParams<T>) {
    let hn = p.hidden;
    grad.b_out[0] = grad.b_out[0] + dy;
    for k in 0..hn {
        grad.w_out[k] = grad.w_out[k] + dy * t.h[k];
        let dh = dy * p.w_out[k];
        let d_o = dh * t.tc[k];
        let dc = dh * t.o[k] * (T::one() - t.tc[k] * t.tc[k]);
        let dz = [
            (k, dc * t.g[k] * t.i[k] * (T::one() - t.i[k])),
            (2 * hn + k, dc * t.i[k] * (T::one() - t.g[k] * t.g[k])),
            (3 * hn + k, d_o * t.o[k] * (T::one() - t.o[k])),
        ];
        for (row, d) in dz {
            grad.b[row] = grad.b[row] + d;
            let w = &mut grad.w_ih[row * p.n_in..(row + 1) * p.n_in];
            for (gw, &xv) in w.iter_mut().zip(x) {
                *gw = *gw + d * xv;
            }
        }
    }
}

/// Mean squared error over `rows` and, optionally, its gradient.
pub fn mse_and_grad<T: Real>(p: &LstmParams<T>, x: &Design<T>, y: &[T], rows: &[usize], grad: Option<&mut LstmParams<T>>) -> T {
    let n = T::from_usize_lossy(rows.len().max(1));
    let mut loss = T::zero();
    match grad {
        Some(g) => {
            *g = LstmParams::zeros(p.n_in, p.hidden);
            for &r in rows {
                let (pred, tr) = forward(p, x.row(r));
                let e = pred - y[r];
                loss = loss + e * e;
                backward(p, x.row(r), &tr, T::lit(2.0) * e / n, g);
            }
        }
        None => {
            for &r in rows {
                let e = forward(p, x.row(r)).0 - y[r];
                loss = loss + e * e;
            }
        }
    }
    loss / n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 16,
            learning_rate: 1e-3,
            batch_size: 32,
            max_epochs: 30,
            patience: 2,
            val_fraction: 0.1,
            seed: 42,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.hidden == 0 {
            return Err(Error::Config("batch_size and hidden must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config(format!("val_fraction must lie in [0, 1), got {}", self.val_fraction)));
        }
        if !(self.learning_rate > 0.0 && self.eps > 0.0) || !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("invalid Adam settings".into()));
        }
        Ok(())
    }
}

pub struct Adam<T> {
    m: LstmParams<T>,
    v: LstmParams<T>,
    step: i32,
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Real> Adam<T> {
    pub fn new(like: &LstmParams<T>, cfg: &TrainConfig) -> Self {
        Adam {
            m: LstmParams::zeros(like.n_in, like.hidden),
            v: LstmParams::zeros(like.n_in, like.hidden),
            step: 0,
            lr: T::lit(cfg.learning_rate),
            beta1: T::lit(cfg.beta1),
            beta2: T::lit(cfg.beta2),
            eps: T::lit(cfg.eps),
        }
    }

    pub fn update(&mut self, p: &mut LstmParams<T>, g: &LstmParams<T>) {
        self.step += 1;
        let c1 = T::one() - self.beta1.powi(self.step);
        let c2 = T::one() - self.beta2.powi(self.step);
        let ps = p.tensors_mut();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((pt, mt), vt), gt) in ps.into_iter().zip(ms).zip(vs).zip(g.tensors()) {
            for k in 0..pt.len() {
                mt[k] = self.beta1 * mt[k] + (T::one() - self.beta1) * gt[k];
                vt[k] = self.beta2 * vt[k] + (T::one() - self.beta2) * gt[k] * gt[k];
                pt[k] = pt[k] - self.lr * (mt[k] / c1) / ((vt[k] / c2).sqrt() + self.eps);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: usize,
    pub best_epoch: usize,
    pub train_mse: Vec<f64>,
    pub val_mse: Vec<f64>,
    pub n_train: usize,
    pub n_val: usize,
}

/// Trains on time-ordered rows; the final `val_fraction` of rows drive early
/// stopping (train MSE is used when that slice is empty). The output bias
/// starts at the mean training target.
pub fn train_regressor<T: Real>(x: &Design<T>, y: &[T], features: &[String], cfg: &TrainConfig) -> Result<(RecurrentRegressor<T>, TrainReport)> {
    cfg.validate()?;
    if x.rows == 0 {
        return Err(Error::InvalidInput("no training rows for the regressor".into()));
    }
    if y.len() != x.rows {
        return Err(Error::Shape { expected: x.rows, got: y.len() });
    }
    if features.len() != x.cols {
        return Err(Error::Shape { expected: x.cols, got: features.len() });
    }
    if x.data.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("regressor inputs contain non-finite values".into()));
    }
    let n_val = ((x.rows as f64) * cfg.val_fraction).floor() as usize;
    let n_val = if n_val >= x.rows { 0 } else { n_val };
    let n_tr = x.rows - n_val;
    let mut train_idx: Vec<usize> = (0..n_tr).collect();
    let val_idx: Vec<usize> = (n_tr..x.rows).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut p = LstmParams::init(x.cols, cfg.hidden, &mut rng);
    p.b_out[0] = y[..n_tr].iter().copied().sum::<T>() / T::from_usize_lossy(n_tr);
    let mut opt = Adam::new(&p, cfg);
    let mut grad = LstmParams::zeros(x.cols, cfg.hidden);

    let monitor = |p: &LstmParams<T>| {
        if val_idx.is_empty() {
            mse_and_grad(p, x, y, &(0..n_tr).collect::<Vec<_>>(), None)
        } else {
            mse_and_grad(p, x, y, &val_idx, None)
        }
    };
    let mut best = (monitor(&p), p.clone(), 0usize);
    let mut report = TrainReport { epochs: 0, best_epoch: 0, train_mse: vec![], val_mse: vec![], n_train: n_tr, n_val };
    let mut wait = 0;
    for epoch in 1..=cfg.max_epochs {
        train_idx.shuffle(&mut rng);
        for batch in train_idx.chunks(cfg.batch_size) {
            mse_and_grad(&p, x, y, batch, Some(&mut grad));
            opt.update(&mut p, &grad);
        }
        let tr = mse_and_grad(&p, x, y, &(0..n_tr).collect::<Vec<_>>(), None);
        let va = monitor(&p);
        if !tr.is_finite() || !va.is_finite() {
            return Err(Error::Numeric(format!("regressor loss diverged at epoch {epoch}")));
        }
        report.epochs = epoch;
        report.train_mse.push(tr.as_f64());
        report.val_mse.push(va.as_f64());
        if va < best.0 {
            best = (va, p.clone(), epoch);
            wait = 0;
        } else {
            wait += 1;
            if wait > cfg.patience {
                break;
            }
        }
    }
    report.best_epoch = best.2;
    Ok((RecurrentRegressor { features: features.to_vec(), params: best.1 }, report))
}
