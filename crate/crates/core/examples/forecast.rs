//! Holds out the last week, refits and forecasts it with 95% intervals.
//!
//! cargo run --release --example forecast -- Italy

use epitrend::arima::{fit_incidence, forecast, FitOptions};
use epitrend::dataset::Dataset;
use epitrend::design::build_regressors;
use epitrend::epi::log_incidence;
use epitrend::select::{scan, ScanGrid};

const HOLDOUT: usize = 7;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "Italy".into());
    let ds = Dataset::fixture();
    let id = ds.resolve(&name).ok_or("unknown region")?;
    let inc = log_incidence(&ds.region(&id)?)?;
    let res = scan(&inc, &ScanGrid::default(), true)?;
    let n = inc.len();
    let train = inc.truncated(n - HOLDOUT);
    let x_all = build_regressors(&inc, &res.config)?;
    let fit = fit_incidence(&train, &x_all.head(n - HOLDOUT), res.best.spec, &FitOptions::default())?;
    let fc = forecast(&fit, &x_all.tail_from(n - HOLDOUT), HOLDOUT)?;
    println!("{id} {} eta={}", fit.spec, res.eta_date);
    for (i, (m, se)) in fc.mean.iter().zip(&fc.se).enumerate() {
        let t = n - HOLDOUT + i;
        println!(
            "{} log theta {m:>7.3} [{:>7.3}, {:>7.3}] observed {:>7.3}",
            inc.dates[t],
            m - 1.96 * se,
            m + 1.96 * se,
            inc.log_theta[t]
        );
    }
    Ok(())
}
