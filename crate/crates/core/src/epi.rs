//! Prevalence, incidence and the log-incidence series the model consumes.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::RegionSeries;

/// New-case count substituted on zero-incidence days before taking logs.
pub const ZERO_CASE_CORRECTION: f64 = 0.5;

/// Log-incidence from the first confirmed case onward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IncidenceSeries {
    pub region_id: String,
    pub dates: Vec<NaiveDate>,
    /// Daily new cases per million, zero on zero-incidence days.
    pub theta: Vec<f64>,
    /// Natural log of incidence after the zero-case correction.
    pub log_theta: Vec<f64>,
    /// Daily new cases from the clamped cumulative series.
    pub new_cases: Vec<u64>,
    /// Index of the first confirmed case in the parent series.
    pub tau_index: usize,
    pub zero_days: Vec<NaiveDate>,
    pub population_millions: f64,
    pub lockdown: Vec<bool>,
    pub lockdown_start: Option<NaiveDate>,
}

impl IncidenceSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn first_case_date(&self) -> NaiveDate {
        self.dates[0]
    }

    /// The first `len` days.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        let end = self.dates.get(len).copied();
        Self {
            region_id: self.region_id.clone(),
            dates: self.dates[..len].to_vec(),
            theta: self.theta[..len].to_vec(),
            log_theta: self.log_theta[..len].to_vec(),
            new_cases: self.new_cases[..len].to_vec(),
            tau_index: self.tau_index,
            zero_days: self
                .zero_days
                .iter()
                .copied()
                .filter(|d| end.map_or(true, |e| *d < e))
                .collect(),
            population_millions: self.population_millions,
            lockdown: self.lockdown[..len].to_vec(),
            lockdown_start: self.lockdown_start,
        }
    }

    /// Converts a log-incidence value back to a daily new-case count.
    pub fn to_cases(&self, log_theta: f64) -> f64 {
        self.population_millions * log_theta.exp()
    }
}

fn index(series: &RegionSeries, t: NaiveDate) -> Result<usize> {
    series.index_of(t).ok_or_else(|| {
        Error::Range(format!(
            "{t} is outside the window of {}",
            series.region_id
        ))
    })
}

/// Cumulative cases per million on date `t`.
pub fn prevalence(series: &RegionSeries, t: NaiveDate) -> Result<f64> {
    let i = index(series, t)?;
    Ok(series.confirmed[i] as f64 / series.population_millions)
}

/// New cases per million on date `t`, from the clamped cumulative series.
pub fn incidence(series: &RegionSeries, t: NaiveDate) -> Result<f64> {
    let i = index(series, t)?;
    if i == 0 {
        return Err(Error::Range(format!(
            "{t} is the first date of {}; incidence needs a predecessor",
            series.region_id
        )));
    }
    let c = series.clamped_confirmed();
    Ok((c[i] - c[i - 1]) as f64 / series.population_millions)
}

/// Builds the log-incidence series from the first confirmed case onward.
///
/// The first day's new cases are `y_tau`, taking the count before `tau` (or
/// before the window) as zero. Zero-incidence days use
/// [`ZERO_CASE_CORRECTION`] new cases and are listed in `zero_days`.
pub fn log_incidence(series: &RegionSeries) -> Result<IncidenceSeries> {
    let clamped = series.clamped_confirmed();
    let tau = clamped
        .iter()
        .position(|&c| c > 0)
        .ok_or_else(|| Error::NoCases(series.region_id.clone()))?;
    let pop = series.population_millions;
    let n = series.len() - tau;
    let mut theta = Vec::with_capacity(n);
    let mut log_theta = Vec::with_capacity(n);
    let mut new_cases = Vec::with_capacity(n);
    let mut zero_days = Vec::new();
    for t in tau..series.len() {
        let prev = if t == 0 { 0 } else { clamped[t - 1] };
        let new = clamped[t] - prev;
        new_cases.push(new);
        theta.push(new as f64 / pop);
        let corrected = if new == 0 {
            zero_days.push(series.dates[t]);
            ZERO_CASE_CORRECTION
        } else {
            new as f64
        };
        log_theta.push((corrected / pop).ln());
    }
    Ok(IncidenceSeries {
        region_id: series.region_id.clone(),
        dates: series.dates[tau..].to_vec(),
        theta,
        log_theta,
        new_cases,
        tau_index: tau,
        zero_days,
        population_millions: pop,
        lockdown: series.lockdown[tau..].to_vec(),
        lockdown_start: series.lockdown_start,
    })
}
