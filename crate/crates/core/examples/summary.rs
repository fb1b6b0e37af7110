//! Final-day case totals and per-million prevalence from the bundled snapshot.
//!
//! cargo run --example summary

use epitrend::dataset::{Dataset, STUDY_COUNTRIES};
use epitrend::epi::prevalence;

fn main() -> epitrend::Result<()> {
    let ds = Dataset::fixture();
    println!("{:<14} {:>9} {:>7} {:>9}", "region", "confirmed", "deaths%", "recov%");
    for name in ["China", "Italy", "World"] {
        let s = ds.summary(name)?;
        println!(
            "{:<14} {:>9} {:>7.2} {:>9.2}",
            s.region,
            s.confirmed,
            s.death_pct(),
            s.recovered_pct()
        );
    }
    println!();
    for id in STUDY_COUNTRIES.iter().map(|c| c.to_string()).chain(["China/Hubei".into()]) {
        let series = ds.region(&id)?;
        let last = *series.dates.last().unwrap();
        println!("{id:<14} {last} {:>10.2} per million", prevalence(&series, last)?);
    }
    Ok(())
}
