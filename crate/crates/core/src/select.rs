//! Exhaustive AIC search over ARIMA orders and the trend changepoint.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::arima::{self, ArimaFit, ArimaSpec, FitOptions};
use crate::design::{build_regressors, eta_range, trend_value, TrendConfig, LIN_POST, LIN_PRE, QUAD_POST, QUAD_PRE};
use crate::epi::IncidenceSeries;
use crate::error::{Error, Result};

/// AIC values closer than this are treated as tied.
pub const AIC_TIE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub p_max: usize,
    pub q_max: usize,
    pub d_set: Vec<usize>,
    /// Explicit orders to try instead of the `p_max` x `q_max` x `d_set` box.
    pub orders: Option<Vec<ArimaSpec>>,
    /// Changepoint offsets to try; `None` means every admissible offset.
    pub eta_candidates: Option<Vec<usize>>,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            p_max: 6,
            q_max: 2,
            d_set: vec![0, 1],
            orders: None,
            eta_candidates: None,
        }
    }
}

impl ScanGrid {
    pub fn specs(&self) -> Vec<ArimaSpec> {
        if let Some(o) = &self.orders {
            return o.clone();
        }
        let mut out = Vec::new();
        for &d in &self.d_set {
            for p in 0..=self.p_max {
                for q in 0..=self.q_max {
                    out.push(ArimaSpec::new(p, d, q));
                }
            }
        }
        out
    }

    pub fn etas(&self, n: usize) -> Vec<usize> {
        let Some(range) = eta_range(n) else {
            return Vec::new();
        };
        match &self.eta_candidates {
            Some(c) => c.iter().copied().filter(|e| range.contains(e)).collect(),
            None => range.collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateStatus {
    Ok,
    NotConverged,
    Degenerate,
    Failed,
}

impl fmt::Display for CandidateStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CandidateStatus::Ok => "ok",
            CandidateStatus::NotConverged => "not_converged",
            CandidateStatus::Degenerate => "degenerate",
            CandidateStatus::Failed => "failed",
        })
    }
}

/// One grid cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub eta: usize,
    pub aic: Option<f64>,
    pub loglik: Option<f64>,
    pub status: CandidateStatus,
}

impl Candidate {
    pub fn spec(&self) -> ArimaSpec {
        ArimaSpec::new(self.p, self.d, self.q)
    }

    pub fn usable(&self) -> bool {
        self.status == CandidateStatus::Ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
        })
    }
}

/// How the post-changepoint direction is read off the fitted trend.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionRule {
    /// Mean trend level after the changepoint against the mean level before.
    #[default]
    MeanLevel,
    /// Mean trend derivative after the changepoint against the mean
    /// derivative before.
    MeanSlope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub region_id: String,
    pub best: ArimaFit,
    pub config: TrendConfig,
    pub eta_date: NaiveDate,
    pub direction: Direction,
    /// Every grid cell, in grid order.
    pub candidates: Vec<Candidate>,
    /// Index of the winner in `candidates`.
    pub best_index: usize,
    /// Cells left out of the argmin (non-converged, degenerate or failed).
    pub excluded: usize,
    /// False when the winner's information matrix could not be inverted.
    pub se_available: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanOptions {
    pub fit: FitOptions,
    pub rule: DirectionRule,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            fit: FitOptions::default(),
            rule: DirectionRule::default(),
        }
    }
}

fn trend_coefs(fit: &ArimaFit) -> [f64; 4] {
    [
        fit.estimate(LIN_PRE),
        fit.estimate(QUAD_PRE),
        fit.estimate(LIN_POST),
        fit.estimate(QUAD_POST),
    ]
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Labels the trend after the changepoint relative to before it, over
/// offsets `0..horizon_days`.
pub fn classify_direction(
    fit: &ArimaFit,
    cfg: &TrendConfig,
    horizon_days: usize,
    rule: DirectionRule,
) -> Direction {
    classify_coefs(trend_coefs(fit), cfg.eta, horizon_days, rule)
}

/// [`classify_direction`] on raw trend coefficients
/// `(lin_pre, quad_pre, lin_post, quad_post)`.
pub fn classify_coefs(coef: [f64; 4], eta: usize, horizon_days: usize, rule: DirectionRule) -> Direction {
    let eta = eta.min(horizon_days);
    let (pre, post) = match rule {
        DirectionRule::MeanLevel => (
            mean((0..eta).map(|s| trend_value(coef, eta, s))),
            mean((eta..horizon_days).map(|s| trend_value(coef, eta, s))),
        ),
        DirectionRule::MeanSlope => (
            mean((0..eta).map(|s| coef[0] + 2.0 * coef[1] * s as f64)),
            mean((eta..horizon_days).map(|s| coef[2] + 2.0 * coef[3] * s as f64)),
        ),
    };
    if post < pre {
        Direction::Decreasing
    } else {
        Direction::Increasing
    }
}

/// Picks the minimum-AIC usable candidate, breaking near-ties by smaller
/// `p + q`, then smaller `p`, then earlier `eta`, then smaller `d`.
pub fn argmin(candidates: &[Candidate]) -> Option<usize> {
    let best = candidates
        .iter()
        .filter(|c| c.usable())
        .filter_map(|c| c.aic)
        .min_by(f64::total_cmp)?;
    candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.usable() && c.aic.is_some_and(|a| a <= best + AIC_TIE))
        .min_by_key(|(_, c)| (c.p + c.q, c.p, c.eta, c.d))
        .map(|(i, _)| i)
}

/// Fits every grid cell and returns the AIC winner, refitted with standard
/// errors. The lockdown column is used when `lockdown` is set and the
/// region has a lockdown date.
pub fn scan(inc: &IncidenceSeries, grid: &ScanGrid, lockdown: bool) -> Result<ScanResult> {
    scan_with(inc, grid, lockdown, &ScanOptions::default())
}

pub fn scan_with(
    inc: &IncidenceSeries,
    grid: &ScanGrid,
    lockdown: bool,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    let include_lockdown = lockdown && inc.lockdown_start.is_some();
    let etas = grid.etas(inc.len());
    if etas.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{} has {} observations; no admissible changepoint",
            inc.region_id,
            inc.len()
        )));
    }
    let specs = grid.specs();
    let cell_opts = FitOptions {
        compute_se: false,
        ..opts.fit
    };
    let mut candidates = Vec::with_capacity(etas.len() * specs.len());
    for &eta in &etas {
        let cfg = TrendConfig::new(inc.tau_index, eta, include_lockdown);
        let x = build_regressors(inc, &cfg)?;
        for &spec in &specs {
            let (aic, loglik, status) = match arima::fit_incidence(inc, &x, spec, &cell_opts) {
                Ok(f) if f.degenerate => (Some(f.aic), Some(f.loglik), CandidateStatus::Degenerate),
                Ok(f) => (Some(f.aic), Some(f.loglik), CandidateStatus::Ok),
                Err(Error::Convergence { best, .. }) => {
                    (Some(best.aic), Some(best.loglik), CandidateStatus::NotConverged)
                }
                Err(_) => (None, None, CandidateStatus::Failed),
            };
            candidates.push(Candidate {
                p: spec.p,
                d: spec.d,
                q: spec.q,
                eta,
                aic,
                loglik,
                status,
            });
        }
    }
    let excluded = candidates.iter().filter(|c| !c.usable()).count();
    let Some(best_index) = argmin(&candidates) else {
        return Err(Error::ScanFailed { candidates });
    };
    let win = &candidates[best_index];
    let cfg = TrendConfig::new(inc.tau_index, win.eta, include_lockdown);
    let x = build_regressors(inc, &cfg)?;
    let (best, se_available) = match arima::fit_incidence(inc, &x, win.spec(), &opts.fit) {
        Ok(f) => (f, true),
        Err(e @ Error::SingularFit { .. }) => (e.into_fit().expect("carries a fit"), false),
        Err(e) => return Err(e),
    };
    let direction = classify_direction(&best, &cfg, inc.len(), opts.rule);
    Ok(ScanResult {
        region_id: inc.region_id.clone(),
        eta_date: inc.dates[win.eta],
        best,
        config: cfg,
        direction,
        candidates,
        best_index,
        excluded,
        se_available,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(p: usize, d: usize, q: usize, eta: usize, aic: f64) -> Candidate {
        Candidate {
            p,
            d,
            q,
            eta,
            aic: Some(aic),
            loglik: None,
            status: CandidateStatus::Ok,
        }
    }

    #[test]
    fn tie_break_prefers_parsimony_then_early_eta() {
        let c = vec![
            cand(2, 1, 0, 10, 100.0),
            cand(1, 1, 0, 12, 100.0 + 5e-7),
            cand(1, 1, 0, 11, 100.0),
            cand(0, 1, 1, 9, 100.0),
        ];
        // p + q ties at 1 for three cells; smaller p wins, then earlier eta
        assert_eq!(argmin(&c), Some(3));
        let c2 = vec![cand(1, 1, 0, 12, 100.0), cand(1, 1, 0, 11, 100.0 + 5e-7)];
        assert_eq!(argmin(&c2), Some(1));
    }

    #[test]
    fn unusable_cells_ignored() {
        let mut bad = cand(0, 0, 0, 5, 1.0);
        bad.status = CandidateStatus::NotConverged;
        let c = vec![bad, cand(1, 0, 0, 5, 50.0)];
        assert_eq!(argmin(&c), Some(1));
        let mut only_bad = cand(0, 0, 0, 5, 1.0);
        only_bad.status = CandidateStatus::Degenerate;
        assert_eq!(argmin(&[only_bad]), None);
    }

    #[test]
    fn sign_logic() {
        // rising before, falling after
        let c = [1.0, 0.0, -1.0, 0.0];
        assert_eq!(classify_coefs(c, 10, 30, DirectionRule::MeanSlope), Direction::Decreasing);
        let flipped = [-1.0, 0.0, 1.0, 0.0];
        assert_eq!(classify_coefs(flipped, 10, 30, DirectionRule::MeanSlope), Direction::Increasing);
        assert_eq!(classify_coefs(c, 10, 30, DirectionRule::MeanLevel), Direction::Decreasing);
        assert_eq!(classify_coefs(flipped, 10, 30, DirectionRule::MeanLevel), Direction::Increasing);
    }

    #[test]
    fn grid_shape() {
        let g = ScanGrid::default();
        assert_eq!(g.specs().len(), 42);
        assert_eq!(g.etas(60), (5..=55).collect::<Vec<_>>());
        let g2 = ScanGrid {
            eta_candidates: Some(vec![2, 20, 58]),
            ..ScanGrid::default()
        };
        assert_eq!(g2.etas(60), vec![20]);
    }
}
