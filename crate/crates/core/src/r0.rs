//! Basic reproduction number by Poisson maximum likelihood.
//!
//! Expected new cases on day `t` are `R0 * Lambda_t` with
//! `Lambda_t = sum_s w_s N_{t-s}`, the serial-interval weighted count of
//! earlier cases. The likelihood is maximized in closed form.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::arima::ArimaFit;
use crate::epi::IncidenceSeries;
use crate::error::{Error, Result};
use crate::special::gamma_cdf;

/// Half the 95% chi-square(1) quantile.
const PROFILE_CUTOFF: f64 = 3.841_458_820_694_124 / 2.0;

/// The three serial-interval candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiChoice {
    Sars,
    Mers,
    Avg,
}

impl SiChoice {
    pub const ALL: [SiChoice; 3] = [SiChoice::Sars, SiChoice::Mers, SiChoice::Avg];

    /// Mean and standard deviation in days.
    pub fn moments(self) -> (f64, f64) {
        match self {
            SiChoice::Sars => (8.4, 3.8),
            SiChoice::Mers => (7.6, 3.4),
            SiChoice::Avg => (8.0, 3.6),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SiChoice::Sars => "sars",
            SiChoice::Mers => "mers",
            SiChoice::Avg => "avg",
        }
    }

    pub fn dist(self) -> SerialIntervalDist {
        let (m, s) = self.moments();
        let mut d = discretize_gamma(m, s, required_horizon(m, s)).expect("valid built-in moments");
        d.label = self.label().to_string();
        d
    }
}

impl fmt::Display for SiChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SiChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sars" => Ok(SiChoice::Sars),
            "mers" => Ok(SiChoice::Mers),
            "avg" | "average" => Ok(SiChoice::Avg),
            other => Err(Error::Config(format!("unknown serial interval {other:?}"))),
        }
    }
}

/// Discretized serial interval: `weights[k - 1]` is the probability of a
/// `k`-day interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerialIntervalDist {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    pub shape: f64,
    pub rate: f64,
    pub weights: Vec<f64>,
}

impl SerialIntervalDist {
    pub fn horizon(&self) -> usize {
        self.weights.len()
    }

    pub fn discrete_mean(&self) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| (i + 1) as f64 * w)
            .sum()
    }

    /// All mass on a single lag.
    pub fn point_mass(lag: usize) -> Self {
        assert!(lag >= 1, "serial interval lag must be at least one day");
        let mut weights = vec![0.0; lag];
        weights[lag - 1] = 1.0;
        Self {
            label: format!("lag{lag}"),
            mean: lag as f64,
            sd: 0.0,
            shape: f64::INFINITY,
            rate: f64::INFINITY,
            weights,
        }
    }
}

/// Smallest admissible truncation horizon, `ceil(mean + 4 sd)`.
pub fn required_horizon(mean: f64, sd: f64) -> usize {
    (mean + 4.0 * sd).ceil() as usize
}

/// Daily weights `F(k) - F(k - 1)`, `k = 1..=horizon`, of a gamma
/// distribution with the given mean and standard deviation, renormalized.
pub fn discretize_gamma(mean: f64, sd: f64, horizon: usize) -> Result<SerialIntervalDist> {
    if !(mean > 0.0 && sd > 0.0 && mean.is_finite() && sd.is_finite()) {
        return Err(Error::Param(format!(
            "serial interval needs positive mean and sd, got {mean} and {sd}"
        )));
    }
    let required = required_horizon(mean, sd);
    if horizon < required {
        return Err(Error::Truncation {
            k: horizon,
            required,
        });
    }
    let shape = (mean / sd).powi(2);
    let rate = mean / (sd * sd);
    let mut weights: Vec<f64> = (1..=horizon)
        .map(|k| gamma_cdf(k as f64, shape, rate) - gamma_cdf((k - 1) as f64, shape, rate))
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(SerialIntervalDist {
        label: format!("gamma({mean},{sd})"),
        mean,
        sd,
        shape,
        rate,
        weights,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct R0Estimate {
    pub point: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub si_used: String,
    /// Poisson log-likelihood at the point estimate, without the
    /// `log N_t!` terms.
    pub loglik_at_point: f64,
    /// Days contributing to the likelihood.
    pub days_used: usize,
}

/// `Lambda_t` for every day; day 0 has none.
pub fn infectiousness(new_cases: &[f64], si: &SerialIntervalDist) -> Vec<f64> {
    (0..new_cases.len())
        .map(|t| {
            (1..=t.min(si.horizon()))
                .map(|s| si.weights[s - 1] * new_cases[t - s])
                .sum()
        })
        .collect()
}

/// Maximum-likelihood R0 from daily counts. Counts may be real-valued.
pub fn estimate_r0_ml(new_cases: &[f64], si: &SerialIntervalDist) -> Result<R0Estimate> {
    if new_cases.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
        return Err(Error::Param("daily counts must be finite and non-negative".into()));
    }
    let lambda = infectiousness(new_cases, si);
    let mut sum_n = 0.0;
    let mut sum_l = 0.0;
    let mut used = 0;
    for (n, l) in new_cases.iter().zip(&lambda) {
        if *l > 0.0 {
            sum_n += n;
            sum_l += l;
            used += 1;
        }
    }
    if sum_l <= 0.0 {
        return Err(Error::NoTransmission);
    }
    let point = sum_n / sum_l;
    let loglik_at_point: f64 = new_cases
        .iter()
        .zip(&lambda)
        .filter(|(_, l)| **l > 0.0)
        .map(|(n, l)| {
            let mu = point * l;
            if *n > 0.0 {
                n * mu.ln() - mu
            } else {
                -mu
            }
        })
        .sum();
    // drop relative to the maximum, as a function of R
    let drop = |r: f64| -> f64 {
        let log_ratio = if sum_n > 0.0 { sum_n * (point / r).ln() } else { 0.0 };
        log_ratio + sum_l * (r - point)
    };
    let ci_lower = if point > 0.0 {
        bisect(|r| drop(r) - PROFILE_CUTOFF, point * 1e-12, point)
    } else {
        0.0
    };
    let mut hi = point.max(1e-12) * 2.0 + 1.0 / sum_l;
    while drop(hi) < PROFILE_CUTOFF {
        hi *= 2.0;
    }
    let ci_upper = bisect(|r| drop(r) - PROFILE_CUTOFF, point, hi);
    Ok(R0Estimate {
        point,
        ci_lower,
        ci_upper,
        si_used: si.label.clone(),
        loglik_at_point,
        days_used: used,
    })
}

/// Root of a function that changes sign on `[a, b]`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa_pos = f(a) > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == fa_pos {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() <= 1e-14 * b.abs().max(1e-300) {
            break;
        }
    }
    0.5 * (a + b)
}

/// Branching-process epidemic: `seed_cases` on day 0, then
/// `N_t ~ Poisson(r0 * Lambda_t)`.
pub fn simulate_epidemic(
    r0: f64,
    si: &SerialIntervalDist,
    seed_cases: u64,
    days: usize,
    rng_seed: u64,
) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut n: Vec<u64> = Vec::with_capacity(days);
    for t in 0..days {
        if t == 0 {
            n.push(seed_cases);
            continue;
        }
        let lambda: f64 = (1..=t.min(si.horizon()))
            .map(|s| si.weights[s - 1] * n[t - s] as f64)
            .sum();
        let mu = r0 * lambda;
        let draw = if mu > 0.0 {
            Poisson::new(mu).map_or(0, |p| p.sample(&mut rng) as u64)
        } else {
            0
        };
        n.push(draw);
    }
    n
}

/// Which daily counts feed the estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountSource {
    /// `P * exp(fitted log incidence)` from the model.
    #[default]
    Fitted,
    /// Reported daily new cases.
    Raw,
}

/// Daily new cases implied by the model's in-sample fit.
pub fn fitted_new_cases(inc: &IncidenceSeries, fit: &ArimaFit) -> Vec<f64> {
    fit.fitted.iter().map(|&l| inc.to_cases(l)).collect()
}

/// R0 for a fitted region.
pub fn r0_from_fit(
    inc: &IncidenceSeries,
    fit: &ArimaFit,
    si: &SerialIntervalDist,
    source: CountSource,
) -> Result<R0Estimate> {
    let counts: Vec<f64> = match source {
        CountSource::Fitted => fitted_new_cases(inc, fit),
        CountSource::Raw => inc.new_cases.iter().map(|&c| c as f64).collect(),
    };
    estimate_r0_ml(&counts, si)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn sars_parameters() {
        let d = SiChoice::Sars.dist();
        // (8.4 / 3.8)^2 and 8.4 / 3.8^2
        assert_abs_diff_eq!(d.shape, 4.886_426_592_797_785, epsilon = 1e-12);
        assert_abs_diff_eq!(d.rate, 0.581_717_451_523_545_7, epsilon = 1e-12);
        assert_eq!(d.horizon(), 24);
        assert!((d.discrete_mean() - 8.4).abs() < 0.5);
    }

    #[test]
    fn exponential_first_weight() {
        let d = discretize_gamma(2.0, 2.0, 10).unwrap();
        let raw_w1 = 1.0 - (-0.5f64).exp();
        let total = 1.0 - (-5.0f64).exp();
        assert_abs_diff_eq!(d.weights[0], raw_w1 / total, epsilon = 1e-14);
    }

    #[test]
    fn truncation_error() {
        assert!(matches!(
            discretize_gamma(8.4, 3.8, 20),
            Err(Error::Truncation { k: 20, required: 24 })
        ));
    }

    #[test]
    fn steady_state_and_doubling() {
        let si = SerialIntervalDist::point_mass(1);
        let flat = vec![7.0; 30];
        assert_abs_diff_eq!(estimate_r0_ml(&flat, &si).unwrap().point, 1.0, epsilon = 1e-12);
        let dbl: Vec<f64> = (0..30).map(|t| 2f64.powi(t)).collect();
        let e = estimate_r0_ml(&dbl, &si).unwrap();
        assert_abs_diff_eq!(e.point, 2.0, epsilon = 1e-12);
        assert!(e.ci_lower < 2.0 && e.ci_upper > 2.0);
    }

    #[test]
    fn no_transmission() {
        let si = SiChoice::Mers.dist();
        assert!(matches!(estimate_r0_ml(&[0.0; 10], &si), Err(Error::NoTransmission)));
    }

    #[test]
    fn zero_r0_simulation_dies_out() {
        let n = simulate_epidemic(0.0, &SiChoice::Avg.dist(), 5, 20, 3);
        assert_eq!(n[0], 5);
        assert!(n[1..].iter().all(|&c| c == 0));
        assert_eq!(n, simulate_epidemic(0.0, &SiChoice::Avg.dist(), 5, 20, 3));
    }

    #[test]
    fn profile_interval_has_cutoff_drop() {
        let counts: Vec<f64> = simulate_epidemic(2.0, &SiChoice::Sars.dist(), 10, 40, 5)
            .into_iter()
            .map(|c| c as f64)
            .collect();
        let si = SiChoice::Sars.dist();
        let e = estimate_r0_ml(&counts, &si).unwrap();
        let lambda = infectiousness(&counts, &si);
        let ll = |r: f64| -> f64 {
            counts
                .iter()
                .zip(&lambda)
                .filter(|(_, l)| **l > 0.0)
                .map(|(n, l)| n * (r * l).ln() - r * l)
                .sum()
        };
        assert_abs_diff_eq!(ll(e.point) - ll(e.ci_lower), PROFILE_CUTOFF, epsilon = 1e-7);
        assert_abs_diff_eq!(ll(e.point) - ll(e.ci_upper), PROFILE_CUTOFF, epsilon = 1e-7);
    }

    proptest! {
        #[test]
        fn scale_invariance(seed in 0u64..500, factor in 2u32..20) {
            let si = SiChoice::Sars.dist();
            let n: Vec<f64> = simulate_epidemic(2.5, &si, 10, 30, seed).into_iter().map(|c| c as f64).collect();
            let scaled: Vec<f64> = n.iter().map(|c| c * factor as f64).collect();
            let a = estimate_r0_ml(&n, &si).unwrap().point;
            let b = estimate_r0_ml(&scaled, &si).unwrap().point;
            prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
        }

        #[test]
        fn weights_sum_to_one(mean in 1.0f64..15.0, ratio in 0.1f64..1.0) {
            let sd = mean * ratio;
            let d = discretize_gamma(mean, sd, required_horizon(mean, sd)).unwrap();
            let s: f64 = d.weights.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(d.weights.iter().all(|w| *w >= 0.0));
        }
    }
}
