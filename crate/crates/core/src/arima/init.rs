//! Moment-based starting values: Yule-Walker and Hannan-Rissanen.

use super::ls::lstsq;

/// Sample autocovariances at lags `0..=max_lag`, divisor `n`.
pub fn autocov(x: &[f64], max_lag: usize, demean: bool) -> Vec<f64> {
    let n = x.len();
    let mean = if demean && n > 0 {
        x.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    (0..=max_lag)
        .map(|k| {
            if k >= n {
                return 0.0;
            }
            (k..n).map(|t| (x[t] - mean) * (x[t - k] - mean)).sum::<f64>() / n as f64
        })
        .collect()
}

/// Durbin-Levinson recursion on autocovariances `gamma[0..=m]`. Returns the
/// order-`m` AR coefficients, the partial autocorrelations at lags `1..=m`,
/// and the final prediction-error variance.
pub fn durbin_levinson(gamma: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
    let m = gamma.len().saturating_sub(1);
    let mut phi: Vec<f64> = Vec::with_capacity(m);
    let mut pacf = Vec::with_capacity(m);
    let mut v = gamma.first().copied().unwrap_or(0.0);
    for k in 1..=m {
        if v <= 0.0 {
            phi.push(0.0);
            pacf.push(0.0);
            continue;
        }
        let acc: f64 = (1..k).map(|j| phi[j - 1] * gamma[k - j]).sum();
        let a = (gamma[k] - acc) / v;
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - a * prev[k - 2 - j];
        }
        phi.push(a);
        pacf.push(a);
        v *= 1.0 - a * a;
    }
    (phi, pacf, v)
}

/// Yule-Walker AR(`p`) estimate.
pub fn yule_walker(x: &[f64], p: usize) -> Vec<f64> {
    durbin_levinson(&autocov(x, p, true)).0
}

/// Hannan-Rissanen ARMA(`p`,`q`) estimate: a long autoregression supplies
/// innovation proxies, then `w_t` is regressed on its own lags and lagged
/// proxies. `None` when the sample is too short.
pub fn hannan_rissanen(w: &[f64], p: usize, q: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    if p + q == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    let n = w.len();
    if q == 0 {
        return (n > p + 2).then(|| (yule_walker(w, p), Vec::new()));
    }
    let long = ((10.0 * (n as f64).log10()) as usize).max(p + q + 2);
    let m = long.min(n / 2 - 1);
    if m == 0 {
        return None;
    }
    let a = yule_walker(w, m);
    let mut e = vec![0.0; n];
    for t in m..n {
        e[t] = w[t] - (1..=m).map(|j| a[j - 1] * w[t - j]).sum::<f64>();
    }
    let start = p.max(m + q);
    if n < start + p + q + 3 {
        return None;
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p + q);
    for j in 1..=p {
        cols.push((start..n).map(|t| w[t - j]).collect());
    }
    for j in 1..=q {
        cols.push((start..n).map(|t| e[t - j]).collect());
    }
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    let (b, _) = lstsq(&refs, &w[start..])?;
    Some((b[..p].to_vec(), b[p..].to_vec()))
}
