//! R0 for the study countries under the three serial intervals, from both
//! fitted and reported counts.
//!
//! cargo run --release --example r0_table

use epitrend::dataset::{Dataset, STUDY_COUNTRIES};
use epitrend::epi::log_incidence;
use epitrend::r0::{estimate_r0_ml, r0_from_fit, CountSource, SiChoice};
use epitrend::select::{scan, ScanGrid};

fn main() -> epitrend::Result<()> {
    let ds = Dataset::fixture();
    println!("{:<14} {:<7} {:>6} {:>6} {:>6}", "country", "counts", "sars", "mers", "avg");
    for c in STUDY_COUNTRIES {
        let inc = log_incidence(&ds.region(c)?)?;
        let res = scan(&inc, &ScanGrid::default(), true)?;
        let raw: Vec<f64> = inc.new_cases.iter().map(|&n| n as f64).collect();
        let mut fitted = Vec::new();
        let mut reported = Vec::new();
        for si in SiChoice::ALL {
            let dist = si.dist();
            fitted.push(r0_from_fit(&inc, &res.best, &dist, CountSource::Fitted)?.point);
            reported.push(estimate_r0_ml(&raw, &dist)?.point);
        }
        for (label, v) in [("fitted", fitted), ("raw", reported)] {
            println!("{c:<14} {label:<7} {:>6.2} {:>6.2} {:>6.2}", v[0], v[1], v[2]);
        }
    }
    Ok(())
}
