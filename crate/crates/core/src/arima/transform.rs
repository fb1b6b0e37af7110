//! Partial-autocorrelation reparameterization.
//!
//! An unconstrained vector `u` maps to partial autocorrelations `tanh(u)`,
//! and the Durbin-Levinson recursion turns those into the coefficients of a
//! stationary polynomial `1 - c_1 z - ... - c_k z^k`.

const PACF_CLIP: f64 = 0.99;

/// Partial autocorrelations to polynomial coefficients.
pub fn pacf_to_coef(pacf: &[f64]) -> Vec<f64> {
    let mut coef: Vec<f64> = Vec::with_capacity(pacf.len());
    for (k, &a) in pacf.iter().enumerate() {
        let prev = coef.clone();
        for j in 0..k {
            coef[j] = prev[j] - a * prev[k - 1 - j];
        }
        coef.push(a);
    }
    coef
}

/// Inverse of [`pacf_to_coef`]. Returns `None` when the polynomial is not
/// stationary (some partial autocorrelation has modulus at least one).
pub fn coef_to_pacf(coef: &[f64]) -> Option<Vec<f64>> {
    let mut c = coef.to_vec();
    let mut pacf = vec![0.0; c.len()];
    for k in (0..c.len()).rev() {
        let a = c[k];
        if !a.is_finite() || a.abs() >= 1.0 {
            return None;
        }
        pacf[k] = a;
        let prev = c.clone();
        let denom = 1.0 - a * a;
        for j in 0..k {
            c[j] = (prev[j] + a * prev[k - 1 - j]) / denom;
        }
    }
    Some(pacf)
}

/// True when `1 - sum phi_j z^j` has all roots outside the unit circle.
pub fn is_stationary(phi: &[f64]) -> bool {
    coef_to_pacf(phi).is_some()
}

/// True when `1 + sum theta_j z^j` has all roots outside the unit circle.
pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stationary(&neg)
}

pub fn ar_from_free(u: &[f64]) -> Vec<f64> {
    pacf_to_coef(&u.iter().map(|x| x.tanh()).collect::<Vec<_>>())
}

pub fn ma_from_free(u: &[f64]) -> Vec<f64> {
    ar_from_free(u).into_iter().map(|c| -c).collect()
}

/// Free parameters for the given AR coefficients, clipping partial
/// autocorrelations away from the boundary. `None` if not stationary.
pub fn ar_to_free(phi: &[f64]) -> Option<Vec<f64>> {
    coef_to_pacf(phi).map(|p| {
        p.into_iter()
            .map(|a| a.clamp(-PACF_CLIP, PACF_CLIP).atanh())
            .collect()
    })
}

pub fn ma_to_free(theta: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    ar_to_free(&neg)
}
