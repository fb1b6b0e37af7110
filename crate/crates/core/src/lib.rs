//! Changepoint trend models with ARIMA errors for epidemic incidence, AIC
//! model selection, residual diagnostics and reproduction-number estimation.

pub mod arima;
pub mod cli;
pub mod dataset;
pub mod design;
pub mod diagnostics;
pub mod epi;
pub mod error;
pub mod ingest;
pub mod r0;
pub mod select;
pub mod special;

pub use error::{Error, Result};
