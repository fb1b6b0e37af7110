//! The subcommands. Each returns the regions that failed; output goes to
//! stdout or, with `--out`, to files.

use std::path::Path;

use serde_json::json;

use super::config::{Format, RunConfig};
use super::pipeline::{
    diagnose, load_region, model_region, r0_for_model, r0_raw, select_regions, Diagnostics,
    RegionFailure, RegionModel,
};
use super::svg::line_chart;
use super::table::{file_stem, star, write_atomic, Cell, Table};
use crate::arima::INTERCEPT;
use crate::dataset::Dataset;
use crate::design::{jump_at_eta, LIN_POST, LIN_PRE, LOCKDOWN, QUAD_POST, QUAD_PRE};
use crate::epi::prevalence;
use crate::error::Result;
use crate::ingest::{country_of, province_of, RegionSeries};
use crate::r0::{CountSource, R0Estimate, SiChoice};

const TREND_TERMS: [&str; 4] = [LIN_PRE, QUAD_PRE, LIN_POST, QUAD_POST];

fn emit(cfg: &RunConfig, name: &str, table: &Table) -> Result<()> {
    let body = table.render(cfg.format)?;
    match &cfg.out {
        Some(dir) => write_atomic(&dir.join(format!("{name}.{}", cfg.format.extension())), body.as_bytes()),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Models every selected region, keeping successes in order.
fn each_model(
    ds: &Dataset,
    cfg: &RunConfig,
    failures: &mut Vec<RegionFailure>,
) -> Result<Vec<RegionModel>> {
    let ids = select_regions(ds, cfg)?;
    let mut out = Vec::new();
    for id in ids {
        match model_region(ds, &id, cfg) {
            Ok(m) => out.push(m),
            Err(f) => failures.push(f),
        }
    }
    Ok(out)
}

fn order(m: &RegionModel) -> String {
    m.scan.best.spec.to_string()
}

pub fn cmd_ingest(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let ids: Vec<String> = if cfg.regions.is_empty() && !cfg.country_level {
        ds.confirmed.regions.keys().cloned().collect()
    } else {
        select_regions(ds, cfg)?
    };
    let mut failures = Vec::new();
    let mut t = Table::new(&[
        "region",
        "first_date",
        "last_date",
        "days",
        "first_case",
        "confirmed",
        "deaths",
        "recovered",
        "population_millions",
        "lockdown_start",
        "warnings",
    ]);
    for id in &ids {
        let series = match ds.region(id) {
            Ok(s) => s,
            Err(error) => {
                failures.push(RegionFailure {
                    region: id.clone(),
                    stage: "ingest",
                    error,
                });
                continue;
            }
        };
        let first_case = series
            .clamped_confirmed()
            .iter()
            .position(|&c| c > 0)
            .map(|i| series.dates[i].to_string());
        t.push(vec![
            id.as_str().into(),
            series.dates.first().map(|d| d.to_string()).unwrap_or_default().into(),
            series.dates.last().map(|d| d.to_string()).unwrap_or_default().into(),
            series.len().into(),
            first_case.map_or(Cell::Empty, Cell::from),
            series.confirmed.last().copied().unwrap_or(0).into(),
            series.deaths.last().copied().unwrap_or(0).into(),
            series.recovered.last().copied().unwrap_or(0).into(),
            series.population_millions.into(),
            series.lockdown_start.map_or(Cell::Empty, |d| d.to_string().into()),
            series.warnings.len().into(),
        ]);
    }
    emit(cfg, "ingest", &t)?;
    Ok(failures)
}

fn coef_rows(m: &RegionModel, t: &mut Table) {
    let fit = &m.scan.best;
    let head = |t: &mut Table, term: &str, est: Cell, se: Option<f64>, st: &str| {
        t.push(vec![
            m.inc.region_id.as_str().into(),
            order(m).into(),
            m.scan.eta_date.to_string().into(),
            m.scan.direction.to_string().into(),
            term.into(),
            est,
            se.into(),
            st.into(),
        ]);
    };
    for (i, v) in fit.phi.iter().enumerate() {
        let se = fit.phi_se.as_ref().map(|s| s[i]);
        head(t, &format!("ar{}", i + 1), (*v).into(), se, star(*v, se));
    }
    for (i, v) in fit.theta_ma.iter().enumerate() {
        let se = fit.theta_se.as_ref().map(|s| s[i]);
        head(t, &format!("ma{}", i + 1), (*v).into(), se, star(*v, se));
    }
    for c in &fit.beta {
        head(t, &c.name, c.estimate.into(), c.se, star(c.estimate, c.se));
    }
    for name in &fit.not_estimable {
        head(t, name, Cell::Empty, None, "");
    }
    let coef = trend_coefs(m);
    head(t, "jump_at_eta", jump_at_eta(coef, m.scan.config.eta).into(), None, "");
    head(t, "sigma2", fit.sigma2.into(), None, "");
    head(t, "loglik", fit.loglik.into(), None, "");
    head(t, "aic", fit.aic.into(), None, "");
}

fn trend_coefs(m: &RegionModel) -> [f64; 4] {
    TREND_TERMS.map(|n| m.scan.best.estimate(n))
}

fn dump_model(cfg: &RunConfig, m: &RegionModel) -> Result<()> {
    let path = cfg
        .out_dir()
        .join("json")
        .join(format!("{}.json", file_stem(&m.inc.region_id)));
    write_json(
        &path,
        &json!({
            "region": m.inc.region_id,
            "eta_date": m.scan.eta_date,
            "direction": m.scan.direction,
            "trend_config": m.scan.config,
            "se_available": m.scan.se_available,
            "fit": m.scan.best,
        }),
    )
}

pub fn cmd_fit(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let mut failures = Vec::new();
    let models = each_model(ds, cfg, &mut failures)?;
    let mut t = Table::new(&["region", "order", "eta_date", "direction", "term", "estimate", "se", "star"]);
    for m in &models {
        coef_rows(m, &mut t);
        if cfg.dump_json {
            dump_model(cfg, m)?;
        }
    }
    emit(cfg, "fit", &t)?;
    Ok(failures)
}

fn grid_table(m: &RegionModel) -> Table {
    let mut t = Table::new(&["p", "d", "q", "eta", "eta_date", "aic", "loglik", "status", "selected"]);
    for (i, c) in m.scan.candidates.iter().enumerate() {
        t.push(vec![
            c.p.into(),
            c.d.into(),
            c.q.into(),
            c.eta.into(),
            m.inc.dates[c.eta].to_string().into(),
            c.aic.into(),
            c.loglik.into(),
            c.status.to_string().into(),
            (i == m.scan.best_index).into(),
        ]);
    }
    t
}

pub fn cmd_scan(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let mut failures = Vec::new();
    let models = each_model(ds, cfg, &mut failures)?;
    let mut t = Table::new(&[
        "region",
        "order",
        "eta",
        "eta_date",
        "direction",
        "aic",
        "cells",
        "excluded",
        "se_available",
    ]);
    for m in &models {
        t.push(vec![
            m.inc.region_id.as_str().into(),
            order(m).into(),
            m.scan.config.eta.into(),
            m.scan.eta_date.to_string().into(),
            m.scan.direction.to_string().into(),
            m.scan.best.aic.into(),
            m.scan.candidates.len().into(),
            m.scan.excluded.into(),
            m.scan.se_available.into(),
        ]);
        if cfg.dump_grid {
            let path = cfg
                .out_dir()
                .join("grid")
                .join(format!("{}.csv", file_stem(&m.inc.region_id)));
            write_atomic(&path, grid_table(m).to_csv()?.as_bytes())?;
        }
        if cfg.dump_json {
            dump_model(cfg, m)?;
        }
    }
    emit(cfg, "scan", &t)?;
    Ok(failures)
}

fn diagnostics_row(m: &RegionModel, d: &Diagnostics) -> Vec<Cell> {
    let lb = d.ljung_box.as_ref();
    let bt = d.backtest.as_ref();
    vec![
        m.inc.region_id.as_str().into(),
        order(m).into(),
        m.scan.best.n_obs.into(),
        lb.map_or(Cell::Empty, |l| l.lags.into()),
        lb.map_or(Cell::Empty, |l| l.fitdf.into()),
        lb.map(|l| l.statistic).into(),
        lb.map(|l| l.p_value).into(),
        bt.map_or(Cell::Empty, |b| b.holdout_days.into()),
        bt.map(|b| b.rmse).into(),
        bt.map(|b| b.sse).into(),
        d.notes.join("; ").into(),
    ]
}

const DIAG_COLUMNS: [&str; 11] = [
    "region", "order", "n_obs", "lags", "fitdf", "box_q", "box_p", "holdout", "rmse", "sse", "notes",
];

pub fn cmd_diagnose(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let mut failures = Vec::new();
    let models = each_model(ds, cfg, &mut failures)?;
    let mut t = Table::new(&DIAG_COLUMNS);
    for m in &models {
        let d = diagnose(m, cfg.holdout);
        t.push(diagnostics_row(m, &d));
        if cfg.dump_json {
            let path = cfg
                .out_dir()
                .join("diagnostics")
                .join(format!("{}.json", file_stem(&m.inc.region_id)));
            write_json(&path, &d)?;
        }
    }
    emit(cfg, "diagnose", &t)?;
    Ok(failures)
}

fn r0_columns(si: &[SiChoice]) -> Vec<String> {
    let mut cols = vec!["region".to_string(), "source".to_string()];
    for s in si {
        cols.push(s.label().to_string());
        cols.push(format!("{}_lower", s.label()));
        cols.push(format!("{}_upper", s.label()));
    }
    cols
}

fn r0_row(region: &str, source: CountSource, est: &[R0Estimate]) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![
        region.into(),
        match source {
            CountSource::Fitted => "fitted",
            CountSource::Raw => "raw",
        }
        .into(),
    ];
    for e in est {
        row.push(e.point.into());
        row.push(e.ci_lower.into());
        row.push(e.ci_upper.into());
    }
    row
}

pub fn cmd_r0(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let mut failures = Vec::new();
    let mut t = Table {
        columns: r0_columns(&cfg.si),
        rows: Vec::new(),
    };
    if cfg.source == CountSource::Raw {
        for id in select_regions(ds, cfg)? {
            match load_region(ds, &id).and_then(|(_, inc)| r0_raw(&inc, &cfg.si)) {
                Ok(est) => t.push(r0_row(&id, CountSource::Raw, &est)),
                Err(f) => failures.push(f),
            }
        }
    } else {
        for m in each_model(ds, cfg, &mut failures)? {
            match r0_for_model(&m, &cfg.si, CountSource::Fitted) {
                Ok(est) => t.push(r0_row(&m.inc.region_id, CountSource::Fitted, &est)),
                Err(f) => failures.push(f),
            }
        }
    }
    emit(cfg, "r0", &t)?;
    Ok(failures)
}

/// The four report tables.
pub struct Report {
    pub summary: Table,
    pub models: Table,
    pub trend: Table,
    pub r0: Table,
}

fn summary_table(ds: &Dataset, ids: &[String]) -> Result<Table> {
    let mut t = Table::new(&[
        "region",
        "date",
        "confirmed",
        "deaths",
        "death_pct",
        "recovered",
        "recovered_pct",
    ]);
    for id in ids.iter().map(String::as_str).chain(std::iter::once("World")) {
        let s = ds.summary(id)?;
        t.push(vec![
            s.region.as_str().into(),
            s.date.to_string().into(),
            s.confirmed.into(),
            s.deaths.into(),
            s.death_pct().into(),
            s.recovered.into(),
            s.recovered_pct().into(),
        ]);
    }
    Ok(t)
}

fn models_row(m: &RegionModel, d: &Diagnostics) -> Vec<Cell> {
    let fit = &m.scan.best;
    let lock = fit.coef(LOCKDOWN);
    let lb = d.ljung_box.as_ref();
    vec![
        m.inc.region_id.as_str().into(),
        order(m).into(),
        lock.map(|c| c.estimate).into(),
        lock.and_then(|c| c.se).into(),
        lock.map_or("", |c| star(c.estimate, c.se)).into(),
        lb.map(|l| l.statistic).into(),
        lb.map(|l| l.p_value).into(),
        lb.map_or(Cell::Empty, |l| l.lags.into()),
        d.backtest.as_ref().map(|b| b.rmse).into(),
        fit.aic.into(),
        d.notes.join("; ").into(),
    ]
}

fn trend_row(m: &RegionModel) -> Vec<Cell> {
    let fit = &m.scan.best;
    let mut row: Vec<Cell> = vec![
        m.inc.region_id.as_str().into(),
        m.inc.first_case_date().to_string().into(),
        m.scan.eta_date.to_string().into(),
        m.scan.direction.to_string().into(),
    ];
    for name in std::iter::once(INTERCEPT).chain(TREND_TERMS) {
        let c = fit.coef(name);
        row.push(c.map(|c| c.estimate).into());
        row.push(c.and_then(|c| c.se).into());
        row.push(c.map_or("", |c| star(c.estimate, c.se)).into());
    }
    row.push(jump_at_eta(trend_coefs(m), m.scan.config.eta).into());
    row.push(m.scan.se_available.into());
    row.push(fit.not_estimable.join(";").into());
    row
}

fn trend_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["region", "first_case", "eta_date", "direction"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for name in std::iter::once(INTERCEPT).chain(TREND_TERMS) {
        cols.push(name.to_string());
        cols.push(format!("{name}_se"));
        cols.push(format!("{name}_star"));
    }
    cols.extend(["jump_at_eta", "se_available", "not_estimable"].map(String::from));
    cols
}

/// Builds the report tables for the selected regions.
pub fn build_report(ds: &Dataset, cfg: &RunConfig) -> Result<(Report, Vec<RegionModel>, Vec<RegionFailure>)> {
    let ids = select_regions(ds, cfg)?;
    let mut failures = Vec::new();
    let models = each_model(ds, cfg, &mut failures)?;
    let mut report = Report {
        summary: summary_table(ds, &ids)?,
        models: Table::new(&[
            "region", "order", "lockdown", "lockdown_se", "lockdown_star", "box_q", "box_p", "box_lags",
            "rmse", "aic", "notes",
        ]),
        trend: Table {
            columns: trend_columns(),
            rows: Vec::new(),
        },
        r0: Table {
            columns: r0_columns(&cfg.si),
            rows: Vec::new(),
        },
    };
    for m in &models {
        let d = diagnose(m, cfg.holdout);
        report.models.push(models_row(m, &d));
        report.trend.push(trend_row(m));
        for source in [CountSource::Fitted, CountSource::Raw] {
            match r0_for_model(m, &cfg.si, source) {
                Ok(est) => report.r0.push(r0_row(&m.inc.region_id, source, &est)),
                Err(f) => failures.push(f),
            }
        }
    }
    Ok((report, models, failures))
}

pub fn cmd_report(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let dir = cfg.out_dir();
    let (report, models, failures) = build_report(ds, cfg)?;
    let named = [
        ("summary", &report.summary),
        ("models", &report.models),
        ("trend", &report.trend),
        ("r0", &report.r0),
    ];
    for (name, t) in named {
        write_atomic(&dir.join(format!("{name}.csv")), t.to_csv()?.as_bytes())?;
    }
    match cfg.format {
        Format::Csv => {}
        Format::Text => {
            let mut s = String::new();
            for (name, t) in named {
                s.push_str(&format!("# {name}\n"));
                s.push_str(&t.to_text());
                s.push('\n');
            }
            write_atomic(&dir.join("report.txt"), s.as_bytes())?;
        }
        Format::Json => {
            let v: serde_json::Map<String, serde_json::Value> = named
                .iter()
                .map(|(n, t)| (n.to_string(), t.to_json()))
                .collect();
            write_json(&dir.join("report.json"), &v)?;
        }
    }
    if cfg.dump_json {
        for m in &models {
            dump_model(cfg, m)?;
        }
    }
    if !failures.is_empty() {
        let mut t = Table::new(&["region", "stage", "error"]);
        for f in &failures {
            t.push(vec![f.region.as_str().into(), f.stage.into(), f.error.to_string().into()]);
        }
        write_atomic(&dir.join("failures.csv"), t.to_csv()?.as_bytes())?;
    }
    Ok(failures)
}

fn log_prevalence_table(series: &RegionSeries) -> Result<Table> {
    let mut t = Table::new(&["date", "prevalence_per_million", "log_prevalence"]);
    for &d in &series.dates {
        let p = prevalence(series, d)?;
        t.push(vec![
            d.to_string().into(),
            p.into(),
            if p > 0.0 { p.ln().into() } else { Cell::Empty },
        ]);
    }
    Ok(t)
}

/// Province ids of every country touched by the selection.
fn snapshot_regions(ds: &Dataset, ids: &[String]) -> Vec<String> {
    let mut countries: Vec<&str> = ids.iter().map(|id| country_of(id)).collect();
    countries.dedup();
    let mut out: Vec<String> = Vec::new();
    for c in countries {
        for p in ds.provinces_of(c) {
            if ds.population.get(&p).is_some() && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

pub fn cmd_plot_data(ds: &Dataset, cfg: &RunConfig) -> Result<Vec<RegionFailure>> {
    let dir = cfg.out_dir();
    let ids = select_regions(ds, cfg)?;
    let mut failures = Vec::new();
    let models = each_model(ds, cfg, &mut failures)?;
    let mut markers = Table::new(&["region", "eta_date", "direction", "order"]);
    for m in &models {
        let stem = file_stem(&m.inc.region_id);
        let t = log_prevalence_table(&m.series)?;
        write_atomic(&dir.join("logprev").join(format!("{stem}.csv")), t.to_csv()?.as_bytes())?;
        markers.push(vec![
            m.inc.region_id.as_str().into(),
            m.scan.eta_date.to_string().into(),
            m.scan.direction.to_string().into(),
            order(m).into(),
        ]);
        if cfg.svg {
            let pts: Vec<(chrono::NaiveDate, f64)> = m
                .series
                .dates
                .iter()
                .filter_map(|&d| {
                    let p = prevalence(&m.series, d).ok()?;
                    (p > 0.0).then(|| (d, p.ln()))
                })
                .collect();
            let svg = line_chart(&m.inc.region_id, &pts, Some(m.scan.eta_date));
            write_atomic(&dir.join("svg").join(format!("{stem}.svg")), svg.as_bytes())?;
        }
    }
    write_atomic(&dir.join("markers.csv"), markers.to_csv()?.as_bytes())?;
    let mut heat = Table::new(&["region", "province", "date", "prevalence_per_million", "log_prevalence"]);
    for id in snapshot_regions(ds, &ids) {
        let Ok(series) = ds.region(&id) else { continue };
        let Some(&last) = series.dates.last() else { continue };
        let p = prevalence(&series, last)?;
        heat.push(vec![
            id.as_str().into(),
            province_of(&id).unwrap_or("").into(),
            last.to_string().into(),
            p.into(),
            if p > 0.0 { p.ln().into() } else { Cell::Empty },
        ]);
    }
    write_atomic(&dir.join("heatmap.csv"), heat.to_csv()?.as_bytes())?;
    Ok(failures)
}
