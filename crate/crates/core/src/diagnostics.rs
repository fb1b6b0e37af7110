//! Residual checks and the holdout backtest.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arima::{self, init::durbin_levinson, ArimaSpec, FitOptions};
use crate::design::{build_regressors, RegressorMatrix, TrendConfig};
use crate::epi::IncidenceSeries;
use crate::error::{Error, Result};
use crate::special::chi_square_sf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub statistic: f64,
    pub lags: usize,
    pub fitdf: usize,
    pub p_value: f64,
}

/// Default lag count: `min(10, n / 5)`.
pub fn default_lags(n: usize) -> usize {
    (n / 5).min(10)
}

fn centered(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let ss: f64 = c.iter().map(|v| v * v).sum();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if x.is_empty() || !(ss > 1e-24 * scale * scale * n) {
        return Err(Error::DegenerateResidual);
    }
    Ok((c, ss))
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag >= series.len() {
        return Err(Error::InsufficientData(format!(
            "lag {max_lag} needs more than {} observations",
            series.len()
        )));
    }
    let (c, ss) = centered(series)?;
    Ok((0..=max_lag)
        .map(|k| {
            if k == 0 {
                1.0
            } else {
                (k..c.len()).map(|t| c[t] * c[t - k]).sum::<f64>() / ss
            }
        })
        .collect())
}

/// Sample partial autocorrelations at lags `1..=max_lag`.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let r = acf(series, max_lag)?;
    Ok(durbin_levinson(&r).1)
}

/// Ljung-Box portmanteau statistic over lags `1..=h` with `h - fitdf`
/// degrees of freedom.
pub fn ljung_box(residuals: &[f64], h: usize, fitdf: usize) -> Result<LjungBoxResult> {
    if h <= fitdf {
        return Err(Error::DegreesOfFreedom { lags: h, fitdf });
    }
    let n = residuals.len();
    let r = acf(residuals, h)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=h)
            .map(|k| r[k] * r[k] / (nf - k as f64))
            .sum::<f64>();
    Ok(LjungBoxResult {
        statistic: q,
        lags: h,
        fitdf,
        p_value: chi_square_sf(q, (h - fitdf) as f64).clamp(0.0, 1.0),
    })
}

/// Sorted standardized residuals paired with standard normal quantiles at
/// plotting positions `(i - 0.5) / n`.
pub fn qq_pairs(residuals: &[f64]) -> Vec<(f64, f64)> {
    let mut r = residuals.to_vec();
    r.sort_by(f64::total_cmp);
    let n = r.len() as f64;
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    r.into_iter()
        .enumerate()
        .map(|(i, v)| (z.inverse_cdf((i as f64 + 0.5) / n), v))
        .collect()
}

pub fn rmse(predicted: &[f64], actual: &[f64]) -> f64 {
    (sse(predicted, actual) / predicted.len() as f64).sqrt()
}

pub fn sse(predicted: &[f64], actual: &[f64]) -> f64 {
    predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub holdout_days: usize,
    pub dates: Vec<NaiveDate>,
    pub predicted_log_theta: Vec<f64>,
    pub predicted_new_cases: Vec<f64>,
    pub actual_new_cases: Vec<u64>,
    pub rmse: f64,
    /// Sum of squared errors over the holdout.
    pub sse: f64,
}

/// Refits `spec` and `cfg` on all but the last `holdout` days and scores
/// the forecast of those days in new cases.
pub fn backtest(
    inc: &IncidenceSeries,
    spec: ArimaSpec,
    cfg: &TrendConfig,
    holdout: usize,
    opts: &FitOptions,
) -> Result<BacktestResult> {
    let n = inc.len();
    if holdout == 0 || holdout >= n {
        return Err(Error::InsufficientData(format!(
            "holdout of {holdout} days on {n} observations"
        )));
    }
    let train = inc.truncated(n - holdout);
    let x = build_regressors(&train, cfg)?;
    let opts = FitOptions {
        compute_se: false,
        ..*opts
    };
    let fit = match arima::fit_incidence(&train, &x, spec, &opts) {
        Ok(f) => f,
        Err(e @ Error::Convergence { .. }) => e.into_fit().expect("carries a fit"),
        Err(e) => return Err(e),
    };
    let offsets: Vec<usize> = (n - holdout..n).collect();
    let lock = cfg
        .include_lockdown
        .then(|| &inc.lockdown[n - holdout..]);
    let future = RegressorMatrix::trend(&offsets, cfg.eta, lock);
    let fc = arima::forecast(&fit, &future, holdout)?;
    let predicted: Vec<f64> = fc.mean.iter().map(|&l| inc.to_cases(l)).collect();
    let actual = inc.new_cases[n - holdout..].to_vec();
    let actual_f: Vec<f64> = actual.iter().map(|&a| a as f64).collect();
    Ok(BacktestResult {
        holdout_days: holdout,
        dates: inc.dates[n - holdout..].to_vec(),
        rmse: rmse(&predicted, &actual_f),
        sse: sse(&predicted, &actual_f),
        predicted_log_theta: fc.mean,
        predicted_new_cases: predicted,
        actual_new_cases: actual,
    })
}
