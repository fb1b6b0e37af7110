//! Grid search over ARIMA orders and the changepoint for one region.
//!
//! cargo run --release --example scan_region -- China

use std::time::Instant;

use epitrend::dataset::Dataset;
use epitrend::epi::log_incidence;
use epitrend::select::{scan, ScanGrid};

fn main() -> epitrend::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "China".into());
    let ds = Dataset::fixture();
    let id = ds
        .resolve(&name)
        .ok_or_else(|| epitrend::Error::UnknownRegion(name.clone()))?;
    let inc = log_incidence(&ds.region(&id)?)?;
    let start = Instant::now();
    let res = scan(&inc, &ScanGrid::default(), true)?;
    let fit = &res.best;
    println!(
        "{id}: {} eta={} ({}) aic={:.2} direction={} excluded={}/{} in {:.1?}",
        fit.spec,
        res.eta_date,
        res.config.eta,
        fit.aic,
        res.direction,
        res.excluded,
        res.candidates.len(),
        start.elapsed()
    );
    for c in &fit.beta {
        let se = c.se.map_or("NA".to_string(), |s| format!("{s:.4}"));
        println!("  {:<10} {:>10.4} ({se})", c.name, c.estimate);
    }
    Ok(())
}
