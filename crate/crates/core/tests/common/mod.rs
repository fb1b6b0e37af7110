//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Sample autocovariances with divisor `n`, demeaned.
pub fn autocov(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (0..=max_lag)
        .map(|k| (k..x.len()).map(|t| (x[t] - m) * (x[t - k] - m)).sum::<f64>() / n)
        .collect()
}

/// Yule-Walker AR(`p`) by a direct Toeplitz solve.
pub fn yule_walker(x: &[f64], p: usize) -> Vec<f64> {
    let g = autocov(x, p);
    let a = DMatrix::from_fn(p, p, |i, j| g[i.abs_diff(j)]);
    let b = DVector::from_fn(p, |i, _| g[i + 1]);
    a.lu().solve(&b).expect("positive definite Toeplitz").iter().copied().collect()
}

fn ols(cols: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let x = DMatrix::from_fn(y.len(), cols.len(), |i, j| cols[j][i]);
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * yv;
    xtx.lu().solve(&xty).expect("full rank").iter().copied().collect()
}

/// Yule-Walker oracle for ARMA(`p`, `q`): a long Yule-Walker
/// autoregression gives innovation proxies, then the demeaned series is
/// regressed on its own lags and lagged proxies. Reduces to plain
/// Yule-Walker when `q = 0`. Returns `(phi, theta)`.
pub fn yule_walker_arma(x: &[f64], p: usize, q: usize) -> (Vec<f64>, Vec<f64>) {
    if q == 0 {
        return (yule_walker(x, p), Vec::new());
    }
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = x.iter().map(|v| v - m).collect();
    let long = (10.0 * (n as f64).log10()) as usize;
    let a = yule_walker(&w, long);
    let mut e = vec![0.0; n];
    for t in long..n {
        e[t] = w[t] - (1..=long).map(|j| a[j - 1] * w[t - j]).sum::<f64>();
    }
    let start = long + q.max(p);
    let mut cols = Vec::new();
    for j in 1..=p {
        cols.push((start..n).map(|t| w[t - j]).collect());
    }
    for j in 1..=q {
        cols.push((start..n).map(|t| e[t - j]).collect());
    }
    let b = ols(&cols, &w[start..]);
    (b[..p].to_vec(), b[p..].to_vec())
}

/// Kolmogorov-Smirnov distance of a sample from U(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let lo = u - i as f64 / n;
            let hi = (i + 1) as f64 / n - u;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
