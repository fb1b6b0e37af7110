//! One regression-with-ARIMA-errors fit at a fixed order and changepoint.
//!
//! cargo run --release --example fit_region -- Italy 2020-02-21 1 1 0

use chrono::NaiveDate;
use epitrend::arima::{fit_incidence, ArimaSpec, FitOptions};
use epitrend::dataset::Dataset;
use epitrend::design::{build_regressors, TrendConfig};
use epitrend::epi::log_incidence;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let name = args.first().map_or("Italy", String::as_str);
    let eta_date: NaiveDate = args.get(1).map_or("2020-02-21", String::as_str).parse()?;
    let order: Vec<usize> = match args.get(2..5) {
        Some(v) => v.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
        None => vec![1, 1, 0],
    };
    let ds = Dataset::fixture();
    let id = ds.resolve(name).ok_or("unknown region")?;
    let inc = log_incidence(&ds.region(&id)?)?;
    let eta = (eta_date - inc.first_case_date()).num_days() as usize;
    let cfg = TrendConfig::new(inc.tau_index, eta, true);
    let x = build_regressors(&inc, &cfg)?;
    let fit = fit_incidence(&inc, &x, ArimaSpec::new(order[0], order[1], order[2]), &FitOptions::default())?;
    println!("{id} {} eta={eta_date} loglik={:.3} aic={:.3} sigma2={:.4}", fit.spec, fit.loglik, fit.aic, fit.sigma2);
    for (i, phi) in fit.phi.iter().enumerate() {
        println!("  ar{}  {phi:>9.4}", i + 1);
    }
    for (i, th) in fit.theta_ma.iter().enumerate() {
        println!("  ma{}  {th:>9.4}", i + 1);
    }
    for c in &fit.beta {
        let se = c.se.map_or("NA".into(), |s| format!("{s:.4}"));
        println!("  {:<10} {:>9.4} ({se})", c.name, c.estimate);
    }
    if !fit.not_estimable.is_empty() {
        println!("  not estimable: {}", fit.not_estimable.join(", "));
    }
    Ok(())
}
