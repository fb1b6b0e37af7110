//! Per-region pipeline shared by the subcommands.

use std::fmt;

use serde::Serialize;

use super::config::{DataSource, RunConfig};
use crate::arima::transform::coef_to_pacf;
use crate::arima::FitOptions;
use crate::dataset::{Dataset, STUDY_COUNTRIES};
use crate::design::eta_range;
use crate::diagnostics::{self, BacktestResult, LjungBoxResult};
use crate::epi::{log_incidence, IncidenceSeries};
use crate::error::{Error, Result};
use crate::ingest::RegionSeries;
use crate::r0::{estimate_r0_ml, r0_from_fit, CountSource, R0Estimate, SiChoice};
use crate::select::{scan_with, ScanOptions, ScanResult};

/// Provinces left out of the default province-level run.
pub const SPECIAL_REGIONS: [&str; 2] = ["Hong Kong", "Macau"];

/// MA partial autocorrelations beyond this are reported as boundary fits.
const MA_BOUNDARY: f64 = 0.99;

/// A failed region: which stage broke and why.
#[derive(Debug)]
pub struct RegionFailure {
    pub region: String,
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for RegionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.region, self.stage, self.error)
    }
}

impl std::error::Error for RegionFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub type RegionResult<T> = std::result::Result<T, RegionFailure>;

fn at<T>(region: &str, stage: &'static str, r: Result<T>) -> RegionResult<T> {
    r.map_err(|error| RegionFailure {
        region: region.to_string(),
        stage,
        error,
    })
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    if RunConfig::fixture_forced() {
        return Ok(Dataset::fixture());
    }
    match &cfg.data {
        Some(DataSource::Fixture) => Ok(Dataset::fixture()),
        Some(DataSource::Files {
            confirmed,
            deaths,
            recovered,
            population,
            lockdown,
        }) => Dataset::from_paths(confirmed, deaths, recovered, population, lockdown.as_deref()),
        None => Err(Error::Config(
            "no data source: give data paths in --config or set EPITREND_FIXTURE=1".into(),
        )),
    }
}

/// Region ids to process: the explicit filter, else the study countries
/// with `country_level`, else the mainland Chinese provinces.
pub fn select_regions(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    if !cfg.regions.is_empty() {
        for name in &cfg.regions {
            let id = ds
                .resolve(name)
                .ok_or_else(|| Error::Config(format!("no region matches '{name}'")))?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
    } else if cfg.country_level {
        out = STUDY_COUNTRIES
            .iter()
            .filter_map(|c| ds.resolve(c))
            .collect();
    } else {
        out = ds
            .modelled_provinces("China", &SPECIAL_REGIONS)
            .into_iter()
            .filter(|id| ds.population.get(id).is_some())
            .collect();
    }
    if out.is_empty() {
        return Err(Error::Config("region filter matched no regions".into()));
    }
    Ok(out)
}

pub fn load_region(ds: &Dataset, id: &str) -> RegionResult<(RegionSeries, IncidenceSeries)> {
    let series = at(id, "ingest", ds.region(id))?;
    let inc = at(id, "incidence", log_incidence(&series))?;
    Ok((series, inc))
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionModel {
    pub series: RegionSeries,
    pub inc: IncidenceSeries,
    pub scan: ScanResult,
}

pub fn model_region(ds: &Dataset, id: &str, cfg: &RunConfig) -> RegionResult<RegionModel> {
    let (series, inc) = load_region(ds, id)?;
    let mut grid = cfg.effective_grid();
    if let Some(date) = cfg.eta {
        let off = (date - inc.first_case_date()).num_days();
        let range = eta_range(inc.len());
        let (min, max) = range.as_ref().map_or((0, 0), |r| (*r.start(), *r.end()));
        if off < 0 || !range.is_some_and(|r| r.contains(&(off as usize))) {
            return Err(RegionFailure {
                region: id.to_string(),
                stage: "design",
                error: Error::EtaRange {
                    eta: off.max(0) as usize,
                    min,
                    max,
                },
            });
        }
        grid.eta_candidates = Some(vec![off as usize]);
    }
    let opts = ScanOptions {
        fit: FitOptions::default(),
        rule: cfg.rule,
    };
    let scan = at(id, "scan", scan_with(&inc, &grid, cfg.lockdown_effect, &opts))?;
    Ok(RegionModel { series, inc, scan })
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub ljung_box: Option<LjungBoxResult>,
    pub acf: Vec<f64>,
    pub pacf: Vec<f64>,
    /// (theoretical quantile, standardized residual)
    pub qq: Vec<(f64, f64)>,
    pub backtest: Option<BacktestResult>,
    /// Caveats, and checks that could not be run with the reason.
    pub notes: Vec<String>,
}

/// Residual checks on the selected model. A check that cannot be run is
/// recorded in `notes` rather than failing the region.
pub fn diagnose(model: &RegionModel, holdout: usize) -> Diagnostics {
    let fit = &model.scan.best;
    let res = &fit.std_residuals;
    let lags = diagnostics::default_lags(res.len());
    let fitdf = fit.spec.p + fit.spec.q;
    let mut notes = Vec::new();
    let neg: Vec<f64> = fit.theta_ma.iter().map(|t| -t).collect();
    if coef_to_pacf(&neg).map_or(true, |r| r.iter().any(|v| v.abs() > MA_BOUNDARY)) {
        notes.push("MA part at the invertibility boundary; regression SEs unreliable".into());
    }
    let ljung_box = diagnostics::ljung_box(res, lags, fitdf)
        .map_err(|e| notes.push(format!("ljung-box: {e}")))
        .ok();
    let acf = diagnostics::acf(res, lags.max(1))
        .map_err(|e| notes.push(format!("acf: {e}")))
        .unwrap_or_default();
    let pacf = diagnostics::pacf(res, lags.max(1)).unwrap_or_default();
    let backtest = diagnostics::backtest(
        &model.inc,
        fit.spec,
        &model.scan.config,
        holdout,
        &FitOptions::default(),
    )
    .map_err(|e| notes.push(format!("backtest: {e}")))
    .ok();
    Diagnostics {
        ljung_box,
        acf,
        pacf,
        qq: diagnostics::qq_pairs(res),
        backtest,
        notes,
    }
}

/// R0 under each serial interval in `si`.
pub fn r0_for_model(model: &RegionModel, si: &[SiChoice], source: CountSource) -> RegionResult<Vec<R0Estimate>> {
    si.iter()
        .map(|s| {
            at(
                &model.inc.region_id,
                "r0",
                r0_from_fit(&model.inc, &model.scan.best, &s.dist(), source),
            )
        })
        .collect()
}

/// R0 from reported counts; needs no model.
pub fn r0_raw(inc: &IncidenceSeries, si: &[SiChoice]) -> RegionResult<Vec<R0Estimate>> {
    let counts: Vec<f64> = inc.new_cases.iter().map(|&c| c as f64).collect();
    si.iter()
        .map(|s| at(&inc.region_id, "r0", estimate_r0_ml(&counts, &s.dist())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_cfg() -> RunConfig {
        RunConfig {
            data: Some(DataSource::Fixture),
            ..RunConfig::default()
        }
    }

    #[test]
    fn default_selection_is_mainland_provinces() {
        let ds = Dataset::fixture();
        let ids = select_regions(&ds, &fixture_cfg()).unwrap();
        assert_eq!(ids.len(), 31);
        assert!(ids.iter().all(|id| id.starts_with("China/")));
        assert!(!ids.iter().any(|id| id.ends_with("Hong Kong")));
    }

    #[test]
    fn country_level_and_filters() {
        let ds = Dataset::fixture();
        let cfg = RunConfig {
            country_level: true,
            ..fixture_cfg()
        };
        assert_eq!(select_regions(&ds, &cfg).unwrap().len(), 6);
        let cfg = RunConfig {
            regions: vec!["south korea".into(), "Hubei".into(), "Korea, South".into()],
            ..fixture_cfg()
        };
        assert_eq!(select_regions(&ds, &cfg).unwrap(), vec!["Korea, South", "China/Hubei"]);
        let cfg = RunConfig {
            regions: vec!["Atlantis".into()],
            ..fixture_cfg()
        };
        assert!(matches!(select_regions(&ds, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn unset_data_source_is_a_config_error() {
        if RunConfig::fixture_forced() {
            return;
        }
        assert!(matches!(load_dataset(&RunConfig::default()), Err(Error::Config(_))));
    }

    #[test]
    fn eta_outside_window_names_the_stage() {
        let ds = Dataset::fixture();
        let cfg = RunConfig {
            eta: Some(chrono::NaiveDate::from_ymd_opt(2019, 12, 1).unwrap()),
            ..fixture_cfg()
        };
        let err = model_region(&ds, "Italy", &cfg).unwrap_err();
        assert_eq!(err.stage, "design");
        assert!(err.to_string().starts_with("Italy: design:"));
    }
}
