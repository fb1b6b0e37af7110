//! Exact ARMA likelihood through a state-space innovations recursion.
//!
//! State dimension `r = max(p, q + 1)`, transition `T` with first column
//! `phi` and ones on the super-diagonal, disturbance loading
//! `R = (1, theta_1, ..., theta_{r-1})`, observation `Z = e_1`. The unit
//! innovation variance is used throughout; the scale is concentrated out.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct StateSpace {
    pub r: usize,
    phi: Vec<f64>,
    rvec: Vec<f64>,
}

impl StateSpace {
    pub fn new(phi: &[f64], theta: &[f64]) -> Self {
        let r = phi.len().max(theta.len() + 1);
        let mut p = vec![0.0; r];
        p[..phi.len()].copy_from_slice(phi);
        let mut rv = vec![0.0; r];
        rv[0] = 1.0;
        rv[1..=theta.len()].copy_from_slice(theta);
        Self { r, phi: p, rvec: rv }
    }

    /// `T a` for the companion transition.
    pub fn transition(&self, a: &[f64], out: &mut [f64]) {
        let r = self.r;
        for i in 0..r {
            out[i] = self.phi[i] * a[0] + if i + 1 < r { a[i + 1] } else { 0.0 };
        }
    }

    /// Stationary state covariance: solves `P = T P T' + R R'` over the
    /// upper triangle. `None` if the system is singular.
    pub fn initial_cov(&self) -> Option<Vec<f64>> {
        let r = self.r;
        if r == 1 {
            let phi = self.phi[0];
            let v = 1.0 / (1.0 - phi * phi);
            return (v.is_finite() && v > 0.0).then(|| vec![v]);
        }
        let m = r * (r + 1) / 2;
        let idx = |i: usize, j: usize| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            i * r - i * (i + 1) / 2 + j
        };
        let mut a = DMatrix::<f64>::zeros(m, m);
        let mut b = DVector::<f64>::zeros(m);
        let phi = &self.phi;
        for i in 0..r {
            for j in i..r {
                let row = idx(i, j);
                a[(row, row)] += 1.0;
                a[(row, idx(0, 0))] -= phi[i] * phi[j];
                if j + 1 < r {
                    a[(row, idx(0, j + 1))] -= phi[i];
                }
                if i + 1 < r {
                    a[(row, idx(i + 1, 0))] -= phi[j];
                }
                if i + 1 < r && j + 1 < r {
                    a[(row, idx(i + 1, j + 1))] -= 1.0;
                }
                b[row] = self.rvec[i] * self.rvec[j];
            }
        }
        let sol = a.lu().solve(&b)?;
        let mut p = vec![0.0; r * r];
        for i in 0..r {
            for j in 0..r {
                p[i * r + j] = sol[idx(i, j)];
            }
        }
        (p[0].is_finite() && p[0] > 0.0).then_some(p)
    }
}

/// Output of filtering several series through the same model.
#[derive(Clone, Debug)]
pub struct Filtered {
    /// Raw innovations, one vector per input series.
    pub innov: Vec<Vec<f64>>,
    /// Innovation variances in units of the disturbance variance.
    pub f: Vec<f64>,
    /// Predicted state after the last observation, one per series.
    pub next_state: Vec<Vec<f64>>,
}

impl Filtered {
    pub fn sum_log_f(&self) -> f64 {
        self.f.iter().map(|f| f.ln()).sum()
    }
}

const STEADY_TOL: f64 = 1e-13;

/// Runs the innovations recursion on every series in `series`. The gains
/// depend only on the model, so they are shared. Returns `None` when the
/// stationary covariance cannot be formed or an innovation variance is not
/// positive.
pub fn filter(ss: &StateSpace, series: &[&[f64]]) -> Option<Filtered> {
    let r = ss.r;
    let n = series.first().map_or(0, |s| s.len());
    let phi = &ss.phi[..r];
    let rv = &ss.rvec[..r];
    // upper triangle of P in a full r x r buffer
    let mut p = ss.initial_cov()?;
    let mut row0 = vec![0.0; r + 1];
    let mut m = vec![0.0; r];
    let mut states: Vec<Vec<f64>> = vec![vec![0.0; r]; series.len()];
    let mut innov: Vec<Vec<f64>> = (0..series.len()).map(|_| Vec::with_capacity(n)).collect();
    let mut fs = Vec::with_capacity(n);
    let mut steady = false;
    for t in 0..n {
        let f = p[0];
        if !(f > 0.0) || !f.is_finite() {
            return None;
        }
        fs.push(f);
        if !steady {
            row0[..r].copy_from_slice(&p[..r]);
            row0[r] = 0.0;
            for i in 0..r {
                m[i] = phi[i] * row0[0] + row0[i + 1];
            }
        }
        for (k, s) in series.iter().enumerate() {
            let a = &mut states[k][..r];
            let v = s[t] - a[0];
            innov[k].push(v);
            let g = v / f;
            let a0 = a[0];
            for i in 0..r - 1 {
                a[i] = phi[i] * a0 + a[i + 1] + m[i] * g;
            }
            a[r - 1] = phi[r - 1] * a0 + m[r - 1] * g;
        }
        if steady {
            continue;
        }
        // P <- T P T' + R R' - m m' / f, upper triangle in place; row 0 of
        // the old P is in row0, and (i+1, j+1) is read before it is written
        let p00 = row0[0];
        let mut change: f64 = 0.0;
        for i in 0..r {
            for j in i..r {
                let mut v = phi[i] * phi[j] * p00 + phi[i] * row0[j + 1] + phi[j] * row0[i + 1];
                if j + 1 < r {
                    v += p[(i + 1) * r + j + 1];
                }
                v += rv[i] * rv[j] - m[i] * m[j] / f;
                let old = &mut p[i * r + j];
                change = change.max((v - *old).abs());
                *old = v;
            }
        }
        if change < STEADY_TOL {
            steady = true;
            for i in 0..r {
                m[i] = phi[i] * p[0] + if i + 1 < r { p[i + 1] } else { 0.0 };
            }
        }
    }
    Some(Filtered {
        innov,
        f: fs,
        next_state: states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ar1_initial_variance() {
        let ss = StateSpace::new(&[0.6], &[]);
        assert_relative_eq!(ss.initial_cov().unwrap()[0], 1.0 / 0.64, epsilon = 1e-14);
    }

    #[test]
    fn ma1_initial_cov() {
        // state (w_t, theta e_t): var w = 1 + theta^2, cov = theta, var2 = theta^2
        let ss = StateSpace::new(&[], &[0.4]);
        let p = ss.initial_cov().unwrap();
        assert_relative_eq!(p[0], 1.16, epsilon = 1e-14);
        assert_relative_eq!(p[1], 0.4, epsilon = 1e-14);
        assert_relative_eq!(p[3], 0.16, epsilon = 1e-14);
    }

    #[test]
    fn arma11_variance() {
        // gamma_0 = (1 + 2 phi theta + theta^2) / (1 - phi^2)
        let (phi, theta) = (0.5, 0.3);
        let ss = StateSpace::new(&[phi], &[theta]);
        let want = (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
        assert_relative_eq!(ss.initial_cov().unwrap()[0], want, epsilon = 1e-12);
    }

    #[test]
    fn ar1_innovations_are_exact() {
        // After the first point, AR(1) innovations are y_t - phi y_{t-1} with F = 1.
        let y = [1.0, -0.5, 2.0, 0.3];
        let ss = StateSpace::new(&[0.7], &[]);
        let out = filter(&ss, &[&y]).unwrap();
        assert_relative_eq!(out.f[0], 1.0 / 0.51, epsilon = 1e-12);
        for t in 1..4 {
            assert_relative_eq!(out.f[t], 1.0, epsilon = 1e-12);
            assert_relative_eq!(out.innov[0][t], y[t] - 0.7 * y[t - 1], epsilon = 1e-12);
        }
        assert_relative_eq!(out.next_state[0][0], 0.7 * 0.3, epsilon = 1e-12);
    }

    #[test]
    fn white_noise_passthrough() {
        let y = [0.1, 0.2, -0.3];
        let out = filter(&StateSpace::new(&[], &[]), &[&y]).unwrap();
        assert_eq!(out.innov[0], y.to_vec());
        assert!(out.f.iter().all(|&f| f == 1.0));
    }
}
