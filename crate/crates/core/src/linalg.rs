//! Small dense linear algebra: LU with partial pivoting.

use crate::scalar::Real;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.n + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.n + c] = self.data[r * self.n + c] + v;
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) * x[c]).sum())
            .collect()
    }
}

/// LU factorisation `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    lu: Matrix<T>,
    perm: Vec<usize>,
    /// Smallest |pivot| relative to the largest |entry| of the input.
    pub min_rel_pivot: T,
}

impl<T: Real> Lu<T> {
    /// Factorises `a`; returns `None` if an exactly zero pivot is met.
    pub fn factor(a: &Matrix<T>) -> Option<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        let mut min_pivot = T::infinity();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|r| (r, lu.get(r, k).abs()))
                .fold((k, T::neg_infinity()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == T::zero() || !pmax.is_finite() {
                return None;
            }
            min_pivot = min_pivot.min(pmax);
            if p != k {
                for c in 0..n {
                    let tmp = lu.get(k, c);
                    lu.set(k, c, lu.get(p, c));
                    lu.set(p, c, tmp);
                }
                perm.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for r in (k + 1)..n {
                let f = lu.get(r, k) / pivot;
                lu.set(r, k, f);
                if f != T::zero() {
                    for c in (k + 1)..n {
                        lu.set(r, c, lu.get(r, c) - f * lu.get(k, c));
                    }
                }
            }
        }
        let min_rel_pivot = if scale > T::zero() { min_pivot / scale } else { T::zero() };
        Some(Lu { lu, perm, min_rel_pivot })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.dim();
        let mut x: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s = s - self.lu.get(r, c) * x[c];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in (r + 1)..n {
                s = s - self.lu.get(r, c) * x[c];
            }
            x[r] = s / self.lu.get(r, r);
        }
        x
    }
}

/// Solves `a x = b`, returning `None` for a singular system.
pub fn solve<T: Real>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    Lu::factor(a).map(|lu| lu.solve(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_pivoting_system() {
        let mut a = Matrix::<f64>::zeros(3);
        let rows = [[0.0, 2.0, 1.0], [1.0, 1.0, 1.0], [2.0, 1.0, 3.0]];
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                a.set(r, c, *v);
            }
        }
        let x_true = [1.0, -2.0, 3.0];
        let b = a.mul_vec(&x_true);
        let x = solve(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_is_none() {
        let mut a = Matrix::<f32>::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }
}
