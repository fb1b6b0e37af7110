//! Builds the country-level report tables in memory and prints them.
//!
//! cargo run --release --example report

use epitrend::cli::{build_report, DataSource, Format, RunConfig};
use epitrend::dataset::Dataset;

fn main() -> epitrend::Result<()> {
    let ds = Dataset::fixture();
    let cfg = RunConfig {
        data: Some(DataSource::Fixture),
        country_level: true,
        ..RunConfig::default()
    };
    let (report, _, failures) = build_report(&ds, &cfg)?;
    for (title, t) in [
        ("summary", &report.summary),
        ("models", &report.models),
        ("trend", &report.trend),
        ("r0", &report.r0),
    ] {
        println!("== {title}\n{}", t.render(Format::Text)?);
    }
    for f in failures {
        eprintln!("{f}");
    }
    Ok(())
}
