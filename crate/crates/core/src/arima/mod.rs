//! Regression with ARIMA(p, d, q) errors, `d` in {0, 1}.
//!
//! The mean is `X b` (plus an intercept when `d = 0`); the error follows an
//! ARMA(p, q) process after `d` differences. For `d = 1` both the series and
//! the regressors are differenced before estimation. The regression
//! coefficients and the innovation variance are concentrated out of the
//! exact Gaussian likelihood, leaving only the ARMA coefficients to the
//! numerical optimizer.

mod forecast;
pub mod init;
pub mod kalman;
pub mod ls;
pub mod optim;
mod simulate;
pub mod transform;

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::design::RegressorMatrix;
use crate::epi::IncidenceSeries;
use crate::error::{Error, Result};

pub use forecast::{forecast, psi_weights, Forecast};
pub use simulate::{simulate, SimParams};

use kalman::{filter, Filtered, StateSpace};

pub const INTERCEPT: &str = "intercept";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        Self { p, d, q }
    }
}

impl fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Estimate an intercept when `d = 0`.
    pub include_mean: bool,
    /// Compute standard errors from the observed information.
    pub compute_se: bool,
    pub max_iter: usize,
    /// Relative change in the objective that counts as converged.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            include_mean: true,
            compute_se: true,
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

/// A named coefficient with its standard error, when available.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coef {
    pub name: String,
    pub estimate: f64,
    pub se: Option<f64>,
}

impl Coef {
    /// Two-sided 5% significance: `|estimate| > 1.96 se`.
    pub fn significant(&self) -> bool {
        self.se.is_some_and(|s| self.estimate.abs() > 1.96 * s)
    }
}

/// State needed to forecast beyond the sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastState {
    /// Predicted ARMA state for the first out-of-sample period.
    pub state: Vec<f64>,
    pub last_y: f64,
    /// Last row of the undifferenced regressors, all input columns.
    pub last_x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    /// Estimated regression coefficients, intercept first when present.
    pub beta: Vec<Coef>,
    /// Input regressors dropped as all-zero or collinear after differencing.
    pub not_estimable: Vec<String>,
    /// Names of every input regressor column, in input order.
    pub regressor_names: Vec<String>,
    pub phi: Vec<f64>,
    pub theta_ma: Vec<f64>,
    pub phi_se: Option<Vec<f64>>,
    pub theta_se: Option<Vec<f64>>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    /// Observations entering the likelihood (after differencing).
    pub n_obs: usize,
    /// Parameter count used in the AIC.
    pub n_params: usize,
    /// One-step-ahead prediction errors, length `n_obs`.
    pub residuals: Vec<f64>,
    /// Residuals scaled to unit variance by their prediction variance.
    pub std_residuals: Vec<f64>,
    /// In-sample one-step predictions of the undifferenced series.
    pub fitted: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Innovation variance is numerically zero relative to the data.
    pub degenerate: bool,
    pub forecast_state: ForecastState,
}

impl ArimaFit {
    pub fn coef(&self, name: &str) -> Option<&Coef> {
        self.beta.iter().find(|c| c.name == name)
    }

    /// Coefficient estimate, zero for regressors that were not estimable.
    pub fn estimate(&self, name: &str) -> f64 {
        self.coef(name).map_or(0.0, |c| c.estimate)
    }

    pub fn has_se(&self) -> bool {
        self.beta.iter().all(|c| c.se.is_some()) && self.phi_se.is_some()
    }

    pub fn intercept(&self) -> f64 {
        self.estimate(INTERCEPT)
    }
}

/// `-2 loglik + 2 k`.
pub fn aic(loglik: f64, k: usize) -> f64 {
    -2.0 * loglik + 2.0 * k as f64
}

fn difference(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

struct Problem {
    p: usize,
    q: usize,
    y: Vec<f64>,
    cols: Vec<Vec<f64>>,
}

struct Eval {
    filt: Filtered,
    beta: Vec<f64>,
    /// Standardized GLS residuals (unit disturbance variance).
    std_resid: Vec<f64>,
    s: f64,
    loglik: f64,
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

fn concentrated_loglik(n: usize, s: f64, sum_log_f: f64) -> f64 {
    let nf = n as f64;
    -0.5 * nf * (LN_2PI + (s / nf).ln() + 1.0) - 0.5 * sum_log_f
}

impl Problem {
    fn arma(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            transform::ar_from_free(&u[..self.p]),
            transform::ma_from_free(&u[self.p..]),
        )
    }

    fn run(&self, phi: &[f64], theta: &[f64]) -> Option<Filtered> {
        let ss = StateSpace::new(phi, theta);
        let mut series: Vec<&[f64]> = Vec::with_capacity(self.cols.len() + 1);
        series.push(&self.y);
        series.extend(self.cols.iter().map(Vec::as_slice));
        filter(&ss, &series)
    }

    fn eval(&self, phi: &[f64], theta: &[f64]) -> Option<Eval> {
        let filt = self.run(phi, theta)?;
        let sf: Vec<f64> = filt.f.iter().map(|f| f.sqrt()).collect();
        let scaled: Vec<Vec<f64>> = filt
            .innov
            .iter()
            .map(|v| v.iter().zip(&sf).map(|(a, b)| a / b).collect())
            .collect();
        let xs: Vec<&[f64]> = scaled[1..].iter().map(Vec::as_slice).collect();
        let (beta, std_resid) = ls::lstsq(&xs, &scaled[0])?;
        let s: f64 = std_resid.iter().map(|v| v * v).sum();
        if !(s > 0.0) || !s.is_finite() {
            return None;
        }
        let loglik = concentrated_loglik(self.y.len(), s, filt.sum_log_f());
        Some(Eval {
            filt,
            beta,
            std_resid,
            s,
            loglik,
        })
    }

    fn objective(&self, u: &[f64]) -> f64 {
        let (phi, theta) = self.arma(u);
        match self.eval(&phi, &theta) {
            Some(e) if e.loglik.is_finite() => -e.loglik,
            _ => 1e100,
        }
    }

    /// Log-likelihood at fixed regression coefficients, scale concentrated.
    fn loglik_at(&self, phi: &[f64], theta: &[f64], beta: &[f64]) -> f64 {
        let Some(filt) = self.run(phi, theta) else {
            return f64::NAN;
        };
        let mut s = 0.0;
        for t in 0..self.y.len() {
            let mut v = filt.innov[0][t];
            for (j, b) in beta.iter().enumerate() {
                v -= b * filt.innov[j + 1][t];
            }
            s += v * v / filt.f[t];
        }
        concentrated_loglik(self.y.len(), s, filt.sum_log_f())
    }
}

/// Fits a regression with ARIMA errors to an incidence series.
pub fn fit_incidence(
    inc: &IncidenceSeries,
    x: &RegressorMatrix,
    spec: ArimaSpec,
    opts: &FitOptions,
) -> Result<ArimaFit> {
    fit(&inc.log_theta, x, spec, opts)
}

/// Fits `y = X b + u` with `u` ARIMA(`spec`).
///
/// Returns [`Error::Convergence`] carrying the best iterate when the
/// optimizer runs out of iterations, and [`Error::SingularFit`] carrying the
/// fit (without standard errors) when the information matrix cannot be
/// inverted.
pub fn fit(y: &[f64], x: &RegressorMatrix, spec: ArimaSpec, opts: &FitOptions) -> Result<ArimaFit> {
    let ArimaSpec { p, d, q } = spec;
    if d > 1 {
        return Err(Error::Param(format!("differencing order {d} not supported")));
    }
    let n_raw = y.len();
    if let Some(rows) = x.nrows() {
        if rows != n_raw {
            return Err(Error::AxisMismatch(format!(
                "series has {n_raw} rows but regressors have {rows}"
            )));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Param("series contains non-finite values".into()));
    }
    let (yd, xd): (Vec<f64>, Vec<Vec<f64>>) = if d == 1 {
        (
            difference(y),
            x.columns.iter().map(|c| difference(c)).collect(),
        )
    } else {
        (y.to_vec(), x.columns.clone())
    };
    let n = yd.len();

    let mut names: Vec<String> = Vec::new();
    let mut cand: Vec<Vec<f64>> = Vec::new();
    if d == 0 && opts.include_mean {
        names.push(INTERCEPT.into());
        cand.push(vec![1.0; n]);
    }
    names.extend(x.names.iter().cloned());
    cand.extend(xd);
    let refs: Vec<&[f64]> = cand.iter().map(Vec::as_slice).collect();
    let keep = ls::independent_columns(&refs);
    let not_estimable: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(i, n)| !keep.contains(i) && n.as_str() != INTERCEPT)
        .map(|(_, n)| n.clone())
        .collect();
    let kept_names: Vec<String> = keep.iter().map(|&i| names[i].clone()).collect();
    let cols: Vec<Vec<f64>> = keep.iter().map(|&i| cand[i].clone()).collect();
    let k = cols.len() + p + q + 1;
    if n <= k + 5 {
        return Err(Error::InsufficientData(format!(
            "{n} observations for {k} parameters in a {spec} model"
        )));
    }
    let problem = Problem {
        p,
        q,
        y: yd,
        cols,
    };

    // starting values
    let col_refs: Vec<&[f64]> = problem.cols.iter().map(Vec::as_slice).collect();
    let w = ls::lstsq(&col_refs, &problem.y)
        .map(|(_, r)| r)
        .unwrap_or_else(|| problem.y.clone());
    let zeros = vec![0.0; p + q];
    let hr = init::hannan_rissanen(&w, p, q).and_then(|(phi, theta)| {
        let mut u = transform::ar_to_free(&phi)?;
        u.extend(transform::ma_to_free(&theta)?);
        Some(u)
    });
    let f_zero = problem.objective(&zeros);
    if f_zero >= 1e100 {
        return Err(Error::DegenerateResidual);
    }
    let u0 = match hr {
        Some(u) if problem.objective(&u) < f_zero => u,
        _ => zeros,
    };

    let (u, iterations, converged) = if p + q == 0 {
        (Vec::new(), 0, true)
    } else {
        let mut obj = |u: &[f64]| problem.objective(u);
        // a coarse simplex pass to get near the optimum, BFGS to finish
        let nm = optim::nelder_mead(&mut obj, &u0, 0.2, 1e-3, opts.max_iter);
        let left = opts.max_iter.saturating_sub(nm.iterations).max(1);
        let bf = optim::bfgs(&mut obj, &nm.x, opts.tol, left);
        let best = if bf.f <= nm.f { bf.x } else { nm.x };
        (best, nm.iterations + bf.iterations, bf.converged)
    };

    let (phi, theta) = problem.arma(&u);
    let ev = problem
        .eval(&phi, &theta)
        .ok_or(Error::DegenerateResidual)?;
    let sigma2 = ev.s / n as f64;
    let sd = sigma2.sqrt();
    let residuals: Vec<f64> = (0..n)
        .map(|t| {
            let mut v = ev.filt.innov[0][t];
            for (j, b) in ev.beta.iter().enumerate() {
                v -= b * ev.filt.innov[j + 1][t];
            }
            v
        })
        .collect();
    let std_residuals: Vec<f64> = ev.std_resid.iter().map(|v| v / sd).collect();
    let fitted: Vec<f64> = if d == 1 {
        std::iter::once(y[0])
            .chain((1..n_raw).map(|t| y[t] - residuals[t - 1]))
            .collect()
    } else {
        (0..n_raw).map(|t| y[t] - residuals[t]).collect()
    };
    let r = ev.filt.next_state[0].len();
    let state: Vec<f64> = (0..r)
        .map(|i| {
            let mut a = ev.filt.next_state[0][i];
            for (j, b) in ev.beta.iter().enumerate() {
                a -= b * ev.filt.next_state[j + 1][i];
            }
            a
        })
        .collect();
    let yvar = {
        let m = problem.y.iter().sum::<f64>() / n as f64;
        problem.y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64
    };
    let degenerate = sigma2 <= 1e-10 * yvar.max(f64::MIN_POSITIVE);

    let mut fit = ArimaFit {
        spec,
        beta: kept_names
            .iter()
            .zip(&ev.beta)
            .map(|(name, &estimate)| Coef {
                name: name.clone(),
                estimate,
                se: None,
            })
            .collect(),
        not_estimable,
        regressor_names: x.names.clone(),
        phi,
        theta_ma: theta,
        phi_se: None,
        theta_se: None,
        sigma2,
        loglik: ev.loglik,
        aic: aic(ev.loglik, k),
        n_obs: n,
        n_params: k,
        residuals,
        std_residuals,
        fitted,
        iterations,
        converged,
        degenerate,
        forecast_state: ForecastState {
            state,
            last_y: y[n_raw - 1],
            last_x: x.columns.iter().map(|c| c[n_raw - 1]).collect(),
        },
    };
    if !converged {
        return Err(Error::Convergence {
            iterations,
            best: Box::new(fit),
        });
    }
    if opts.compute_se {
        match standard_errors(&problem, &fit, &ev.beta) {
            Some(se) => {
                fit.phi_se = Some(se[..p].to_vec());
                fit.theta_se = Some(se[p..p + q].to_vec());
                for (c, s) in fit.beta.iter_mut().zip(&se[p + q..]) {
                    c.se = Some(*s);
                }
            }
            None => return Err(Error::SingularFit { fit: Box::new(fit) }),
        }
    }
    Ok(fit)
}

fn standard_errors(problem: &Problem, fit: &ArimaFit, beta: &[f64]) -> Option<Vec<f64>> {
    let (p, q) = (problem.p, problem.q);
    let mut x: Vec<f64> = fit.phi.clone();
    x.extend(&fit.theta_ma);
    x.extend(beta);
    let mut h: Vec<f64> = vec![1e-4; p + q];
    for (b, col) in beta.iter().zip(&problem.cols) {
        let rms = (col.iter().map(|v| v * v).sum::<f64>() / col.len() as f64).sqrt();
        h.push(1e-4 * b.abs().max(1.0 / rms));
    }
    let mut f = |v: &[f64]| problem.loglik_at(&v[..p], &v[p..p + q], &v[p + q..]);
    let hess = optim::hessian(&mut f, &x, &h);
    let m = x.len();
    let info = DMatrix::from_fn(m, m, |i, j| -hess[i][j]);
    if info.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let inv = info.cholesky()?.inverse();
    let se: Vec<f64> = (0..m).map(|i| inv[(i, i)]).map(f64::sqrt).collect();
    se.iter().all(|s| s.is_finite() && *s > 0.0).then_some(se)
}
