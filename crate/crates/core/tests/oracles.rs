mod common;

use epitrend::arima::{self, psi_weights, ArimaSpec, FitOptions, SimParams};
use epitrend::dataset::Dataset;
use epitrend::design::RegressorMatrix;
use epitrend::diagnostics::ljung_box;
use epitrend::r0::{estimate_r0_ml, simulate_epidemic, SerialIntervalDist, SiChoice};
use proptest::prelude::*;

fn no_mean() -> FitOptions {
    FitOptions {
        compute_se: false,
        include_mean: false,
        ..FitOptions::default()
    }
}

#[test]
fn summary_rows() {
    let ds = Dataset::fixture();
    let china = ds.summary("China").unwrap();
    assert_eq!((china.confirmed, china.deaths, china.recovered), (81305, 3259, 71857));
    let italy = ds.summary("Italy").unwrap();
    assert_eq!(italy.confirmed, 53578);
    assert_eq!(format!("{:.2}", italy.death_pct()), "9.01");
    assert_eq!(format!("{:.2}", italy.recovered_pct()), "11.33");
}

#[test]
fn arma_fits_track_yule_walker() {
    let spec = ArimaSpec::new(1, 0, 1);
    let params = SimParams::arma(vec![0.6], vec![0.3], 1.0);
    for seed in 0..20 {
        let y = arima::simulate(spec, &params, &RegressorMatrix::empty(), 400, seed).unwrap();
        let fit = arima::fit(&y, &RegressorMatrix::empty(), spec, &no_mean()).unwrap();
        let (phi, theta) = common::yule_walker_arma(&y, 1, 1);
        assert!((fit.phi[0] - phi[0]).abs() < 0.1, "seed {seed}: {} vs {}", fit.phi[0], phi[0]);
        assert!((fit.theta_ma[0] - theta[0]).abs() < 0.1, "seed {seed}");
    }
}

#[test]
fn regression_coefficients_recovered() {
    let n = 300;
    let x = RegressorMatrix {
        names: vec!["trend".into()],
        columns: vec![(0..n).map(|t| t as f64 / n as f64).collect()],
    };
    let spec = ArimaSpec::new(1, 0, 0);
    let params = SimParams::arma(vec![0.5], vec![], 0.25).with_mean(2.0, vec![3.0]);
    let y = arima::simulate(spec, &params, &x, n, 7).unwrap();
    let fit = arima::fit(&y, &x, spec, &FitOptions::default()).unwrap();
    let b = fit.coef("trend").unwrap();
    assert!((b.estimate - 3.0).abs() < 3.0 * b.se.unwrap(), "{b:?}");
    assert!((fit.intercept() - 2.0).abs() < 0.5);
}

#[test]
fn ljung_box_small_case() {
    // r1 = -9/20, r2 = 3/20 with mean 1/2
    let lb = ljung_box(&[1.0, -1.0, 2.0, 0.0, 1.0, -1.0, 2.0, 0.0], 2, 0).unwrap();
    assert!((lb.statistic - 1339.0 / 140.0).abs() < 1e-10);
}

#[test]
fn ljung_box_null_p_values_look_uniform() {
    let params = SimParams::white_noise(1.0);
    let ps: Vec<f64> = (0..200u64)
        .map(|seed| {
            let x = arima::simulate(ArimaSpec::new(0, 0, 0), &params, &RegressorMatrix::empty(), 150, seed).unwrap();
            ljung_box(&x, 10, 0).unwrap().p_value
        })
        .collect();
    assert!(common::ks_uniform(&ps) < common::ks_critical_1pct(ps.len()));
}

#[test]
fn r0_closed_form_cases() {
    let lag1 = SerialIntervalDist::point_mass(1);
    assert!((estimate_r0_ml(&[20.0; 15], &lag1).unwrap().point - 1.0).abs() < 1e-12);
    let doubling: Vec<f64> = (0..15).map(|t| 2f64.powi(t)).collect();
    assert!((estimate_r0_ml(&doubling, &lag1).unwrap().point - 2.0).abs() < 1e-12);
}

#[test]
fn r0_recovered_from_simulations() {
    let si = SiChoice::Avg.dist();
    let hits = (0..50u64)
        .filter(|&seed| {
            let n: Vec<f64> = simulate_epidemic(2.0, &si, 10, 40, seed).into_iter().map(|v| v as f64).collect();
            (estimate_r0_ml(&n, &si).unwrap().point - 2.0).abs() <= 0.2
        })
        .count();
    assert!(hits >= 45, "{hits}/50");
}

#[test]
fn ar1_psi_weights_are_powers() {
    let psi = psi_weights(&[0.8], &[], 0, 6);
    for (j, p) in psi.iter().enumerate() {
        assert!((p - 0.8f64.powi(j as i32)).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn geometric_growth_gives_ratio_to_the_lag(r in 0.5f64..3.0, lag in 1usize..5) {
        let n: Vec<f64> = (0..30).map(|t| 10.0 * r.powi(t)).collect();
        let est = estimate_r0_ml(&n, &SerialIntervalDist::point_mass(lag)).unwrap();
        let want = r.powi(lag as i32);
        prop_assert!((est.point - want).abs() < 1e-9 * want);
        prop_assert!(est.ci_lower <= est.point && est.point <= est.ci_upper);
    }

    #[test]
    fn r0_scales_with_counts(scale in 1.0f64..50.0, seed in 0u64..1000) {
        // the point estimate is invariant to scaling the counts
        let si = SiChoice::Sars.dist();
        let n: Vec<f64> = simulate_epidemic(1.8, &si, 5, 30, seed).into_iter().map(|v| v as f64).collect();
        prop_assume!(n.iter().sum::<f64>() > 50.0);
        let a = estimate_r0_ml(&n, &si).unwrap();
        let scaled: Vec<f64> = n.iter().map(|v| v * scale).collect();
        let b = estimate_r0_ml(&scaled, &si).unwrap();
        prop_assert!((a.point - b.point).abs() < 1e-9 * a.point);
        prop_assert!(b.ci_upper - b.ci_lower <= a.ci_upper - a.ci_lower + 1e-12);
    }

    #[test]
    fn ljung_box_p_value_in_unit_interval(seed in 0u64..10_000, h in 1usize..15) {
        let x = arima::simulate(ArimaSpec::new(0, 0, 0), &SimParams::white_noise(1.0), &RegressorMatrix::empty(), 60, seed).unwrap();
        let lb = ljung_box(&x, h, 0).unwrap();
        prop_assert!(lb.statistic >= 0.0);
        prop_assert!((0.0..=1.0).contains(&lb.p_value));
    }

    #[test]
    fn ar1_estimate_is_stationary(phi in -0.9f64..0.9, seed in 0u64..1000) {
        let spec = ArimaSpec::new(1, 0, 0);
        let y = arima::simulate(spec, &SimParams::arma(vec![phi], vec![], 1.0), &RegressorMatrix::empty(), 200, seed).unwrap();
        let fit = arima::fit(&y, &RegressorMatrix::empty(), spec, &no_mean()).unwrap();
        prop_assert!(fit.phi[0].abs() < 1.0);
        prop_assert!((fit.phi[0] - common::yule_walker(&y, 1)[0]).abs() < 0.1);
    }
}
