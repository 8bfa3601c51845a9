//! Causal lags and trailing rolling statistics on hourly series.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RollStat {
    Mean,
    Max,
    Sum,
}

impl RollStat {
    pub fn name(self) -> &'static str {
        match self {
            RollStat::Mean => "mean",
            RollStat::Max => "max",
            RollStat::Sum => "sum",
        }
    }
}

/// `out[t] = series[t - lag]`; the first `lag` hours are missing.
pub fn make_lag<T: Copy>(series: &[Option<T>], lag: usize) -> Vec<Option<T>> {
    (0..series.len())
        .map(|t| if t >= lag { series[t - lag] } else { None })
        .collect()
}

/// Statistic over the window `(t - w, t]`, emitted only when all `w` values are present.
pub fn make_rolling<T: Real>(series: &[Option<T>], w: usize, stat: RollStat) -> Vec<Option<T>> {
    let n = series.len();
    let mut out = vec![None; n];
    if w == 0 {
        return out;
    }
    // running count of missing values lets us skip incomplete windows cheaply
    let mut missing = 0usize;
    for t in 0..n {
        missing += usize::from(series[t].is_none());
        if t >= w {
            missing -= usize::from(series[t - w].is_none());
        }
        if t + 1 < w || missing > 0 {
            continue;
        }
        let window = series[t + 1 - w..=t].iter().map(|v| v.unwrap());
        out[t] = Some(match stat {
            RollStat::Sum => window.sum(),
            RollStat::Mean => window.sum::<T>() / T::from_usize_lossy(w),
            RollStat::Max => window.fold(T::neg_infinity(), T::max),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    #[test]
    fn lag_examples() {
        let x = s(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let l = make_lag(&x, 6);
        assert_eq!(l[6], Some(1.0));
        assert!(l[..6].iter().all(Option::is_none));
        let mut y = x.clone();
        y[2] = None;
        assert_eq!(make_lag(&y, 6)[8], None);
        assert!(make_lag(&s(&[4.0; 20]), 12)[12..].iter().all(|v| *v == Some(4.0)));
    }

    #[test]
    fn rolling_examples() {
        let x = s(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(make_rolling(&x, 6, RollStat::Sum)[5], Some(21.0));
        assert_eq!(make_rolling(&x, 6, RollStat::Mean)[5], Some(3.5));
        let m = make_rolling(&x, 3, RollStat::Max);
        assert_eq!(&m[2..], &x[2..]);
        let mut y = x.clone();
        y[3] = None;
        let r = make_rolling(&y, 2, RollStat::Sum);
        assert_eq!(r, vec![None, Some(3.0), Some(5.0), None, None, Some(11.0)]);
    }

    proptest! {
        #[test]
        fn rolling_matches_naive(v in prop::collection::vec(prop::option::weighted(0.9, -10.0..10.0f64), 0..80), w in 1usize..12) {
            let r = make_rolling(&v, w, RollStat::Sum);
            for t in 0..v.len() {
                let naive = if t + 1 < w { None } else {
                    v[t + 1 - w..=t].iter().try_fold(0.0, |acc, x| x.map(|x| acc + x))
                };
                match (r[t], naive) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
        }
    }
}
