//! Command-line front end: `epitrend <command> [flags]`.
//!
//! Settings come from defaults, then the `--config` file, then flags. Exit
//! codes: 0 on success, 1 when any region failed, 2 on usage or
//! configuration errors.

mod commands;
mod config;
mod pipeline;
mod svg;
mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{
    build_report, cmd_diagnose, cmd_fit, cmd_ingest, cmd_plot_data, cmd_r0, cmd_report, cmd_scan, Report,
};
pub use config::{parse_order, parse_si, DataSource, Format, RunConfig, DEFAULT_OUT, FIXTURE_ENV};
pub use pipeline::{
    diagnose, load_dataset, model_region, select_regions, Diagnostics, RegionFailure, RegionModel,
    SPECIAL_REGIONS,
};
pub use svg::line_chart;
pub use table::{file_stem, star, write_atomic, Cell, Table};

use crate::error::Error;
use crate::r0::{CountSource, SiChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "epitrend",
    version,
    about = "Changepoint trend models with ARIMA errors and R0 estimates for COVID-19 incidence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Load and validate the data; list regions.
    Ingest,
    /// Fit the selected model and print its coefficients.
    Fit,
    /// Search ARIMA orders and changepoints by AIC.
    Scan,
    /// Ljung-Box, ACF/PACF and holdout RMSE for the selected model.
    Diagnose,
    /// Basic reproduction number under each serial interval.
    R0,
    /// Write summary, models, trend and r0 tables.
    Report,
    /// Write log-prevalence series, changepoint markers and a heatmap snapshot.
    PlotData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SiArg {
    Sars,
    Mers,
    Avg,
    All,
}

impl SiArg {
    fn choices(self) -> Vec<SiChoice> {
        match self {
            SiArg::Sars => vec![SiChoice::Sars],
            SiArg::Mers => vec![SiChoice::Mers],
            SiArg::Avg => vec![SiChoice::Avg],
            SiArg::All => SiChoice::ALL.to_vec(),
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Key-value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Region name(s), comma separated: a country, a province or a region id.
    #[arg(long, global = true, value_delimiter = ',')]
    pub region: Vec<String>,
    /// Default to the six study countries instead of the Chinese provinces.
    #[arg(long, global = true)]
    pub country_level: bool,
    #[arg(long, global = true)]
    pub p_max: Option<usize>,
    #[arg(long, global = true)]
    pub q_max: Option<usize>,
    /// Fix the ARIMA order, e.g. `1,1,0`.
    #[arg(long, global = true)]
    pub order: Option<String>,
    /// Fix the changepoint date (YYYY-MM-DD).
    #[arg(long, global = true)]
    pub eta: Option<NaiveDate>,
    /// Days held out for the RMSE backtest.
    #[arg(long, global = true)]
    pub holdout: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub si: Option<SiArg>,
    /// Estimate R0 from reported rather than fitted counts.
    #[arg(long, global = true)]
    pub raw: bool,
    /// Write every grid cell to `<out>/grid/<region>.csv`.
    #[arg(long, global = true)]
    pub dump_grid: bool,
    /// Write fitted models as JSON under `<out>`.
    #[arg(long, global = true)]
    pub dump_json: bool,
    /// Also write an SVG chart per region (plot-data).
    #[arg(long, global = true)]
    pub svg: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Flags {
    /// Layers the flags over the config file (if any) and the defaults.
    pub fn to_config(&self) -> crate::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if !self.region.is_empty() {
            cfg.regions = self.region.clone();
        }
        cfg.country_level |= self.country_level;
        if let Some(v) = self.p_max {
            cfg.grid.p_max = v;
        }
        if let Some(v) = self.q_max {
            cfg.grid.q_max = v;
        }
        if let Some(v) = &self.order {
            cfg.order = Some(parse_order(v)?);
        }
        if self.eta.is_some() {
            cfg.eta = self.eta;
        }
        if let Some(v) = self.holdout {
            cfg.holdout = v;
        }
        if let Some(v) = self.si {
            cfg.si = v.choices();
        }
        if self.raw {
            cfg.source = CountSource::Raw;
        }
        cfg.dump_grid |= self.dump_grid;
        cfg.dump_json |= self.dump_json;
        cfg.svg |= self.svg;
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::UnknownRegion(_) => EXIT_USAGE,
        _ => EXIT_PARTIAL,
    }
}

/// Runs one command against a loaded configuration and returns the exit code.
pub fn execute(command: Command, cfg: &RunConfig) -> i32 {
    let ds = match load_dataset(cfg) {
        Ok(ds) => ds,
        Err(e) => {
            eprintln!("epitrend: {e}");
            return exit_code_for(&e);
        }
    };
    let result = match command {
        Command::Ingest => cmd_ingest(&ds, cfg),
        Command::Fit => cmd_fit(&ds, cfg),
        Command::Scan => cmd_scan(&ds, cfg),
        Command::Diagnose => cmd_diagnose(&ds, cfg),
        Command::R0 => cmd_r0(&ds, cfg),
        Command::Report => cmd_report(&ds, cfg),
        Command::PlotData => cmd_plot_data(&ds, cfg),
    };
    match result {
        Ok(failures) if failures.is_empty() => EXIT_OK,
        Ok(failures) => {
            for f in &failures {
                eprintln!("epitrend: {f}");
            }
            EXIT_PARTIAL
        }
        Err(e) => {
            eprintln!("epitrend: {e}");
            exit_code_for(&e)
        }
    }
}

/// Parses arguments and runs; the bin's whole body.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.flags.to_config() {
        Ok(cfg) => execute(cli.command, &cfg),
        Err(e) => {
            eprintln!("epitrend: {e}");
            EXIT_USAGE
        }
    }
}
