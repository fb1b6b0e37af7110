use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::transform::{is_invertible, is_stationary};
use super::ArimaSpec;
use crate::design::RegressorMatrix;
use crate::error::{Error, Result};

const BURN_IN: usize = 500;

/// Parameters for [`simulate`]. The mean is `intercept + X beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma2: f64,
    pub intercept: f64,
    pub beta: Vec<f64>,
}

impl SimParams {
    pub fn white_noise(sigma2: f64) -> Self {
        Self::arma(Vec::new(), Vec::new(), sigma2)
    }

    pub fn arma(phi: Vec<f64>, theta: Vec<f64>, sigma2: f64) -> Self {
        Self {
            phi,
            theta,
            sigma2,
            intercept: 0.0,
            beta: Vec::new(),
        }
    }

    pub fn with_mean(mut self, intercept: f64, beta: Vec<f64>) -> Self {
        self.intercept = intercept;
        self.beta = beta;
        self
    }
}

/// Draws a series of length `n` from the regression-with-ARIMA-errors
/// model. Deterministic for a given `seed`.
pub fn simulate(
    spec: ArimaSpec,
    params: &SimParams,
    x: &RegressorMatrix,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if params.phi.len() != spec.p || params.theta.len() != spec.q {
        return Err(Error::Param(format!(
            "{spec} needs {} AR and {} MA coefficients",
            spec.p, spec.q
        )));
    }
    if spec.d > 1 {
        return Err(Error::Param(format!("differencing order {} not supported", spec.d)));
    }
    if !is_stationary(&params.phi) {
        return Err(Error::Param(format!("AR coefficients {:?} are not stationary", params.phi)));
    }
    if !is_invertible(&params.theta) {
        return Err(Error::Param(format!("MA coefficients {:?} are not invertible", params.theta)));
    }
    if !(params.sigma2 > 0.0) {
        return Err(Error::Param("innovation variance must be positive".into()));
    }
    if params.beta.len() != x.ncols() {
        return Err(Error::Param(format!(
            "{} coefficients for {} regressors",
            params.beta.len(),
            x.ncols()
        )));
    }
    if let Some(rows) = x.nrows() {
        if rows != n {
            return Err(Error::AxisMismatch(format!("{rows} regressor rows for length {n}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, params.sigma2.sqrt()).map_err(|e| Error::Param(e.to_string()))?;
    let total = BURN_IN + n;
    let e: Vec<f64> = (0..total).map(|_| normal.sample(&mut rng)).collect();
    let mut u = vec![0.0; total];
    for t in 0..total {
        let mut v = e[t];
        for (i, ph) in params.phi.iter().enumerate() {
            if t > i {
                v += ph * u[t - i - 1];
            }
        }
        for (j, th) in params.theta.iter().enumerate() {
            if t > j {
                v += th * e[t - j - 1];
            }
        }
        u[t] = v;
    }
    let mut out: Vec<f64> = u[BURN_IN..].to_vec();
    if spec.d == 1 {
        let mut acc = 0.0;
        for v in out.iter_mut() {
            acc += *v;
            *v = acc;
        }
    }
    for (t, v) in out.iter_mut().enumerate() {
        *v += params.intercept;
        for (b, c) in params.beta.iter().zip(&x.columns) {
            *v += b * c[t];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let p = SimParams::arma(vec![0.5], vec![0.2], 1.0);
        let s = ArimaSpec::new(1, 0, 1);
        let a = simulate(s, &p, &RegressorMatrix::empty(), 50, 9).unwrap();
        let b = simulate(s, &p, &RegressorMatrix::empty(), 50, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_nonstationary() {
        let p = SimParams::arma(vec![1.1], vec![], 1.0);
        let r = simulate(ArimaSpec::new(1, 0, 0), &p, &RegressorMatrix::empty(), 10, 1);
        assert!(matches!(r, Err(Error::Param(_))));
    }

    #[test]
    fn moments() {
        let wn = simulate(ArimaSpec::new(0, 0, 0), &SimParams::white_noise(1.0), &RegressorMatrix::empty(), 100_000, 1).unwrap();
        let m = wn.iter().sum::<f64>() / wn.len() as f64;
        let v = wn.iter().map(|x| (x - m).powi(2)).sum::<f64>() / wn.len() as f64;
        assert!((v - 1.0).abs() < 0.02, "{v}");

        let ar = simulate(ArimaSpec::new(1, 0, 0), &SimParams::arma(vec![0.5], vec![], 1.0), &RegressorMatrix::empty(), 100_000, 2).unwrap();
        let g = crate::arima::init::autocov(&ar, 1, true);
        assert!((g[1] / g[0] - 0.5).abs() < 0.02);
    }
}
