//! Simulated ARMA and epidemic series with the estimators run back on them.
//!
//! cargo run --release --example simulate

use epitrend::arima::{fit, init::yule_walker, simulate, ArimaSpec, FitOptions, SimParams};
use epitrend::design::RegressorMatrix;
use epitrend::r0::{estimate_r0_ml, simulate_epidemic, SiChoice};

fn main() -> epitrend::Result<()> {
    let opts = FitOptions {
        include_mean: false,
        ..FitOptions::default()
    };
    let none = RegressorMatrix::empty();
    for (phi, theta) in [(vec![0.7], vec![]), (vec![], vec![0.5]), (vec![0.7], vec![0.5])] {
        let spec = ArimaSpec::new(phi.len(), 0, theta.len());
        let y = simulate(spec, &SimParams::arma(phi.clone(), theta.clone(), 1.0), &none, 500, 42)?;
        let f = fit(&y, &none, spec, &opts)?;
        println!("{spec} true phi={phi:?} theta={theta:?} -> phi={:.3?} theta={:.3?}", f.phi, f.theta_ma);
        if theta.is_empty() {
            println!("  yule-walker phi={:.3?}", yule_walker(&y, phi.len()));
        }
    }
    let si = SiChoice::Sars.dist();
    for r0 in [1.2, 2.5, 4.0] {
        let cases = simulate_epidemic(r0, &si, 10, 40, 7);
        let n: Vec<f64> = cases.iter().map(|&c| c as f64).collect();
        let e = estimate_r0_ml(&n, &si)?;
        println!(
            "R0 {r0}: {} cases over 40 days, estimate {:.2} [{:.2}, {:.2}]",
            cases.iter().sum::<u64>(),
            e.point,
            e.ci_lower,
            e.ci_upper
        );
    }
    Ok(())
}
