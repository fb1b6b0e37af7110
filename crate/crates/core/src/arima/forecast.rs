use serde::{Deserialize, Serialize};

use super::kalman::StateSpace;
use super::{ArimaFit, INTERCEPT};
use crate::design::RegressorMatrix;
use crate::error::{Error, Result};

/// Point forecasts of the undifferenced series with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

/// Coefficients `psi_0..psi_{h-1}` of `theta(B) / (phi(B) (1 - B)^d)`.
pub fn psi_weights(phi: &[f64], theta: &[f64], d: usize, h: usize) -> Vec<f64> {
    let mut ar = phi.to_vec();
    for _ in 0..d {
        let mut next = vec![0.0; ar.len() + 1];
        next[0] = 1.0;
        for (i, a) in ar.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a;
        }
        ar = next;
    }
    let mut psi = Vec::with_capacity(h);
    for j in 0..h {
        let mut v = if j == 0 {
            1.0
        } else {
            theta.get(j - 1).copied().unwrap_or(0.0)
        };
        for i in 1..=j.min(ar.len()) {
            v += ar[i - 1] * psi[j - i];
        }
        psi.push(v);
    }
    psi
}

/// Forecasts `h` periods ahead. `x_future` must carry the training
/// regressor columns for the forecast periods.
pub fn forecast(fit: &ArimaFit, x_future: &RegressorMatrix, h: usize) -> Result<Forecast> {
    if x_future.names != fit.regressor_names {
        return Err(Error::AxisMismatch(format!(
            "forecast regressors {:?} differ from training regressors {:?}",
            x_future.names, fit.regressor_names
        )));
    }
    if let Some(rows) = x_future.nrows() {
        if rows != h {
            return Err(Error::AxisMismatch(format!(
                "{rows} regressor rows for a horizon of {h}"
            )));
        }
    }
    let d = fit.spec.d;
    let ss = StateSpace::new(&fit.phi, &fit.theta_ma);
    let mut a = fit.forecast_state.state.clone();
    let mut next = vec![0.0; a.len()];
    let terms: Vec<(usize, f64)> = fit
        .beta
        .iter()
        .filter(|c| c.name != INTERCEPT)
        .map(|c| {
            let j = fit
                .regressor_names
                .iter()
                .position(|n| *n == c.name)
                .expect("coefficient names come from the regressors");
            (j, c.estimate)
        })
        .collect();
    let mut prev_x = fit.forecast_state.last_x.clone();
    let mut prev_y = fit.forecast_state.last_y;
    let mut mean = Vec::with_capacity(h);
    for i in 0..h {
        let row = x_future.row(i);
        let mut m = if d == 0 { fit.intercept() } else { 0.0 };
        for &(j, b) in &terms {
            m += b * if d == 1 { row[j] - prev_x[j] } else { row[j] };
        }
        let v = m + a[0];
        let y = if d == 1 { prev_y + v } else { v };
        mean.push(y);
        prev_y = y;
        prev_x = row;
        ss.transition(&a, &mut next);
        std::mem::swap(&mut a, &mut next);
    }
    let psi = psi_weights(&fit.phi, &fit.theta_ma, d, h);
    let mut acc = 0.0;
    let se = psi
        .iter()
        .map(|p| {
            acc += p * p;
            (fit.sigma2 * acc).sqrt()
        })
        .collect();
    Ok(Forecast { mean, se })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_random_walk() {
        assert_eq!(psi_weights(&[], &[], 1, 4), vec![1.0; 4]);
    }

    #[test]
    fn psi_ar1() {
        let p = psi_weights(&[0.5], &[], 0, 4);
        assert_eq!(p, vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn psi_ma1_integrated() {
        // (1 + 0.3B) / (1 - B): 1, 1.3, 1.3, ...
        let p = psi_weights(&[], &[0.3], 1, 3);
        assert!((p[1] - 1.3).abs() < 1e-15 && (p[2] - 1.3).abs() < 1e-15);
    }
}
