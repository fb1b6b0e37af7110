//! Residual checks and the holdout backtest for a region's selected model.
//!
//! cargo run --release --example diagnose_region -- "South Korea"

use epitrend::cli::{diagnose, model_region, DataSource, RunConfig};
use epitrend::dataset::Dataset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "South Korea".into());
    let ds = Dataset::fixture();
    let id = ds.resolve(&name).ok_or("unknown region")?;
    let cfg = RunConfig {
        data: Some(DataSource::Fixture),
        ..RunConfig::default()
    };
    let model = model_region(&ds, &id, &cfg)?;
    let d = diagnose(&model, 3);
    println!("{id}: {} eta={}", model.scan.best.spec, model.scan.eta_date);
    if let Some(lb) = &d.ljung_box {
        println!("ljung-box Q={:.3} lags={} fitdf={} p={:.4}", lb.statistic, lb.lags, lb.fitdf, lb.p_value);
    }
    println!("lag    acf   pacf");
    for (k, (a, p)) in d.acf.iter().skip(1).zip(&d.pacf).enumerate() {
        println!("{:>3} {a:>6.3} {p:>6.3}", k + 1);
    }
    if let Some(bt) = &d.backtest {
        for ((date, p), a) in bt.dates.iter().zip(&bt.predicted_new_cases).zip(&bt.actual_new_cases) {
            println!("{date} predicted {p:>9.1} reported {a:>7}");
        }
        println!("rmse {:.2}", bt.rmse);
    }
    for n in &d.notes {
        println!("note: {n}");
    }
    Ok(())
}
