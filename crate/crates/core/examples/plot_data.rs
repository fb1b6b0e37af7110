//! Writes log-prevalence series and an SVG chart for a few provinces.
//!
//! cargo run --release --example plot_data -- /tmp/epitrend-plots

use std::path::PathBuf;

use epitrend::cli::{file_stem, line_chart, write_atomic};
use epitrend::dataset::Dataset;
use epitrend::epi::{log_incidence, prevalence};
use epitrend::select::{scan, ScanGrid};

fn main() -> epitrend::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "epitrend-plots".into()));
    let ds = Dataset::fixture();
    let grid = ScanGrid {
        p_max: 2,
        q_max: 2,
        ..ScanGrid::default()
    };
    for id in ["China/Hubei", "China/Guangdong", "China/Zhejiang"] {
        let series = ds.region(id)?;
        let points: Vec<_> = series
            .dates
            .iter()
            .filter_map(|&d| {
                let p = prevalence(&series, d).ok()?;
                (p > 0.0).then(|| (d, p.ln()))
            })
            .collect();
        let res = scan(&log_incidence(&series)?, &grid, true)?;
        let svg = line_chart(&format!("{id}: log prevalence per million"), &points, Some(res.eta_date));
        let path = out.join(format!("{}.svg", file_stem(id)));
        write_atomic(&path, svg.as_bytes())?;
        println!("{} ({} days, changepoint {})", path.display(), points.len(), res.eta_date);
    }
    Ok(())
}
