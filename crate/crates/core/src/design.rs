//! Segmented quadratic trend regressors with an optional lockdown dummy.

use serde::{Deserialize, Serialize};

use crate::epi::IncidenceSeries;
use crate::error::{Error, Result};

/// Minimum number of observations on each side of the changepoint.
pub const MIN_SEGMENT: usize = 5;

pub const LIN_PRE: &str = "lin_pre";
pub const QUAD_PRE: &str = "quad_pre";
pub const LIN_POST: &str = "lin_post";
pub const QUAD_POST: &str = "quad_post";
pub const LOCKDOWN: &str = "lockdown";

/// Changepoint configuration. `eta` counts days since the first case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendConfig {
    pub tau_index: usize,
    pub eta: usize,
    pub include_lockdown: bool,
}

impl TrendConfig {
    pub fn new(tau_index: usize, eta: usize, include_lockdown: bool) -> Self {
        Self {
            tau_index,
            eta,
            include_lockdown,
        }
    }
}

/// Admissible changepoint offsets for a series of length `n`.
pub fn eta_range(n: usize) -> Option<std::ops::RangeInclusive<usize>> {
    (n >= 2 * MIN_SEGMENT).then(|| MIN_SEGMENT..=n - MIN_SEGMENT)
}

/// Named columns aligned to the rows of an incidence series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressorMatrix {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl RegressorMatrix {
    pub fn empty() -> Self {
        Self {
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Trend columns for the given offsets `t - tau`, without checking that
    /// `eta` is admissible. Used for forecast rows.
    pub fn trend(offsets: &[usize], eta: usize, lockdown: Option<&[bool]>) -> Self {
        let mut cols = vec![Vec::with_capacity(offsets.len()); 4];
        for &s in offsets {
            let x = s as f64;
            let (pre, post) = if s < eta { (1.0, 0.0) } else { (0.0, 1.0) };
            cols[0].push(x * pre);
            cols[1].push(x * x * pre);
            cols[2].push(x * post);
            cols[3].push(x * x * post);
        }
        let mut names: Vec<String> = [LIN_PRE, QUAD_PRE, LIN_POST, QUAD_POST]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if let Some(l) = lockdown {
            assert_eq!(l.len(), offsets.len(), "lockdown flags must align with rows");
            names.push(LOCKDOWN.into());
            cols.push(l.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect());
        }
        Self {
            names,
            columns: cols,
        }
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn nrows(&self) -> Option<usize> {
        self.columns.first().map(Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn row(&self, t: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[t]).collect()
    }

    /// First `n` rows.
    pub fn head(&self, n: usize) -> Self {
        Self {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[..n].to_vec()).collect(),
        }
    }

    /// Rows from `start` onward.
    pub fn tail_from(&self, start: usize) -> Self {
        Self {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[start..].to_vec()).collect(),
        }
    }
}

/// Builds the regressor matrix for `inc`. The lockdown column is only added
/// when `cfg.include_lockdown` is set.
pub fn build_regressors(inc: &IncidenceSeries, cfg: &TrendConfig) -> Result<RegressorMatrix> {
    let n = inc.len();
    let range = eta_range(n).ok_or_else(|| {
        Error::InsufficientData(format!(
            "{} has {n} observations; a changepoint needs at least {}",
            inc.region_id,
            2 * MIN_SEGMENT
        ))
    })?;
    if !range.contains(&cfg.eta) {
        return Err(Error::EtaRange {
            eta: cfg.eta,
            min: *range.start(),
            max: *range.end(),
        });
    }
    let offsets: Vec<usize> = (0..n).collect();
    let lockdown = cfg.include_lockdown.then_some(inc.lockdown.as_slice());
    Ok(RegressorMatrix::trend(&offsets, cfg.eta, lockdown))
}

/// Value of the segmented trend at offset `s` given the four trend
/// coefficients (pre linear, pre quadratic, post linear, post quadratic).
pub fn trend_value(coef: [f64; 4], eta: usize, s: usize) -> f64 {
    let x = s as f64;
    if s < eta {
        coef[0] * x + coef[1] * x * x
    } else {
        coef[2] * x + coef[3] * x * x
    }
}

/// Jump of the trend at the changepoint: post minus pre, both evaluated at
/// `eta`.
pub fn jump_at_eta(coef: [f64; 4], eta: usize) -> f64 {
    let x = eta as f64;
    (coef[2] - coef[0]) * x + (coef[3] - coef[1]) * x * x
}
