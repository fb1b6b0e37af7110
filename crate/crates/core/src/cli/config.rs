//! Run configuration: defaults, a `key = value` config file, then flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::arima::ArimaSpec;
use crate::error::{Error, Result};
use crate::r0::{CountSource, SiChoice};
use crate::select::{DirectionRule, ScanGrid};

pub const FIXTURE_ENV: &str = "EPITREND_FIXTURE";
pub const DEFAULT_OUT: &str = "epitrend-out";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Text,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Text => "txt",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Fixture,
    Files {
        confirmed: PathBuf,
        deaths: PathBuf,
        recovered: PathBuf,
        population: PathBuf,
        lockdown: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// `None` until a config file or the fixture switch supplies one.
    pub data: Option<DataSource>,
    /// Region names as given; empty means the default set.
    pub regions: Vec<String>,
    /// Default to the study countries instead of the Chinese provinces.
    pub country_level: bool,
    pub grid: ScanGrid,
    /// Fix the ARIMA order instead of searching.
    pub order: Option<ArimaSpec>,
    /// Fix the changepoint date instead of searching.
    pub eta: Option<NaiveDate>,
    pub lockdown_effect: bool,
    pub rule: DirectionRule,
    pub holdout: usize,
    pub si: Vec<SiChoice>,
    pub source: CountSource,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub dump_grid: bool,
    pub dump_json: bool,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: None,
            regions: Vec::new(),
            country_level: false,
            grid: ScanGrid::default(),
            order: None,
            eta: None,
            lockdown_effect: true,
            rule: DirectionRule::default(),
            holdout: 3,
            si: SiChoice::ALL.to_vec(),
            source: CountSource::Fitted,
            out: None,
            format: Format::Csv,
            dump_grid: false,
            dump_json: false,
            svg: false,
        }
    }
}

#[derive(Default)]
struct Paths {
    confirmed: Option<PathBuf>,
    deaths: Option<PathBuf>,
    recovered: Option<PathBuf>,
    population: Option<PathBuf>,
    lockdown: Option<PathBuf>,
    fixture: bool,
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn list(v: &str) -> Vec<String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// `sars`, `mers`, `avg` or `all`.
pub fn parse_si(v: &str) -> Result<Vec<SiChoice>> {
    if v.trim().eq_ignore_ascii_case("all") {
        return Ok(SiChoice::ALL.to_vec());
    }
    list(v)
        .iter()
        .map(|s| s.parse::<SiChoice>())
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config("si: empty selection".into()))
            } else {
                Ok(v)
            }
        })
}

/// `p,d,q`, optionally parenthesised.
pub fn parse_order(v: &str) -> Result<ArimaSpec> {
    let parts: Vec<usize> = v
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|s| parse_num("order", s.trim()))
        .collect::<Result<_>>()?;
    match parts[..] {
        [p, d, q] if d <= 1 => Ok(ArimaSpec::new(p, d, q)),
        [_, _, _] => Err(Error::Config("order: d must be 0 or 1".into())),
        _ => Err(Error::Config(format!("order: expected p,d,q, got '{v}'"))),
    }
}

pub fn parse_date(key: &str, v: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(v.trim(), "%Y-%m-%d")
        .map_err(|_| Error::Config(format!("{key}: expected YYYY-MM-DD, got '{v}'")))
}

fn parse_rule(v: &str) -> Result<DirectionRule> {
    match v.to_ascii_lowercase().as_str() {
        "mean-level" | "level" => Ok(DirectionRule::MeanLevel),
        "mean-slope" | "slope" => Ok(DirectionRule::MeanSlope),
        _ => Err(Error::Config(format!("direction_rule: unknown rule '{v}'"))),
    }
}

impl RunConfig {
    /// Parses a config file. Relative paths are taken from `base`.
    pub fn from_kv(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut paths = Paths::default();
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected key = value",
                    lineno + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let v = value.trim();
            match key.as_str() {
                "confirmed" => paths.confirmed = Some(resolve(v)),
                "deaths" => paths.deaths = Some(resolve(v)),
                "recovered" => paths.recovered = Some(resolve(v)),
                "population" => paths.population = Some(resolve(v)),
                "lockdown" => paths.lockdown = Some(resolve(v)),
                "fixture" => paths.fixture = parse_bool(&key, v)?,
                "region" | "regions" => cfg.regions = list(v),
                "country_level" => cfg.country_level = parse_bool(&key, v)?,
                "p_max" => cfg.grid.p_max = parse_num(&key, v)?,
                "q_max" => cfg.grid.q_max = parse_num(&key, v)?,
                "d_set" => {
                    cfg.grid.d_set = list(v)
                        .iter()
                        .map(|s| parse_num(&key, s))
                        .collect::<Result<_>>()?
                }
                "order" => cfg.order = Some(parse_order(v)?),
                "eta" => cfg.eta = Some(parse_date(&key, v)?),
                "lockdown_effect" => cfg.lockdown_effect = parse_bool(&key, v)?,
                "direction_rule" => cfg.rule = parse_rule(v)?,
                "holdout" => cfg.holdout = parse_num(&key, v)?,
                "si" => cfg.si = parse_si(v)?,
                "raw" => {
                    cfg.source = if parse_bool(&key, v)? {
                        CountSource::Raw
                    } else {
                        CountSource::Fitted
                    }
                }
                "out" => cfg.out = Some(resolve(v)),
                "format" => cfg.format = v.parse()?,
                "dump_grid" => cfg.dump_grid = parse_bool(&key, v)?,
                "dump_json" => cfg.dump_json = parse_bool(&key, v)?,
                "svg" => cfg.svg = parse_bool(&key, v)?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.data = match paths {
            Paths {
                confirmed: Some(confirmed),
                deaths: Some(deaths),
                recovered: Some(recovered),
                population: Some(population),
                lockdown,
                ..
            } => Some(DataSource::Files {
                confirmed,
                deaths,
                recovered,
                population,
                lockdown,
            }),
            Paths {
                confirmed: None,
                deaths: None,
                recovered: None,
                population: None,
                fixture,
                ..
            } => fixture.then_some(DataSource::Fixture),
            _ => {
                return Err(Error::Config(
                    "confirmed, deaths, recovered and population must be given together".into(),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_kv(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.d_set.is_empty() || self.grid.d_set.iter().any(|&d| d > 1) {
            return Err(Error::Config("d_set must be a non-empty subset of {0, 1}".into()));
        }
        if self.holdout == 0 {
            return Err(Error::Config("holdout must be at least 1".into()));
        }
        if let Some(DataSource::Files {
            confirmed,
            deaths,
            recovered,
            population,
            lockdown,
        }) = &self.data
        {
            for p in [confirmed, deaths, recovered, population]
                .into_iter()
                .chain(lockdown)
            {
                if !p.is_file() {
                    return Err(Error::Config(format!("{} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    /// Output directory for file-producing commands.
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// The grid after applying a fixed order, if any.
    pub fn effective_grid(&self) -> ScanGrid {
        let mut g = self.grid.clone();
        if let Some(spec) = self.order {
            g.orders = Some(vec![spec]);
        }
        g
    }

    /// True when `EPITREND_FIXTURE=1` is set in the environment.
    pub fn fixture_forced() -> bool {
        std::env::var(FIXTURE_ENV).is_ok_and(|v| v.trim() == "1")
    }
}
