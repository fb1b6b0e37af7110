//! Cumulative-count ingestion.
//!
//! Reads the JHU CSSE time-series layout
//! (`Province/State,Country/Region,Lat,Long,<M/D/YY>...`), joins population
//! figures and lockdown calendars, and aggregates provinces into countries.
//!
//! Region ids are the country name for country-level rows and
//! `Country/Province` for sub-national rows, e.g. `China/Hubei`.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const META_COLUMNS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountKind {
    Confirmed,
    Deaths,
    Recovered,
}

impl fmt::Display for CountKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountKind::Confirmed => "confirmed",
            CountKind::Deaths => "deaths",
            CountKind::Recovered => "recovered",
        })
    }
}

/// Builds the region id used throughout the crate.
pub fn region_id(country: &str, province: &str) -> String {
    if province.is_empty() {
        country.to_string()
    } else {
        format!("{country}/{province}")
    }
}

/// Country part of a region id.
pub fn country_of(id: &str) -> &str {
    id.split_once('/').map_or(id, |(c, _)| c)
}

/// Province part of a region id, if any.
pub fn province_of(id: &str) -> Option<&str> {
    id.split_once('/').map(|(_, p)| p)
}

/// One parsed time-series file: a shared ascending date axis and one count
/// vector per region.
#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    pub kind: CountKind,
    pub dates: Vec<NaiveDate>,
    pub regions: BTreeMap<String, Vec<u64>>,
}

impl CountTable {
    pub fn get(&self, id: &str) -> Option<&[u64]> {
        self.regions.get(id).map(Vec::as_slice)
    }

    /// Sum over all regions on the last date.
    pub fn total_last(&self) -> u64 {
        self.regions.values().filter_map(|v| v.last()).sum()
    }

    /// Serializes back into the JHU layout. Lat/Long are written as `0.0`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header = vec![
            "Province/State".to_string(),
            "Country/Region".to_string(),
            "Lat".to_string(),
            "Long".to_string(),
        ];
        header.extend(self.dates.iter().map(|d| format_us_date(*d)));
        w.write_record(&header).expect("in-memory write");
        for (id, counts) in &self.regions {
            let mut rec = vec![
                province_of(id).unwrap_or("").to_string(),
                country_of(id).to_string(),
                "0.0".to_string(),
                "0.0".to_string(),
            ];
            rec.extend(counts.iter().map(u64::to_string));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

fn format_us_date(d: NaiveDate) -> String {
    format!("{}/{}/{:02}", d.month(), d.day(), d.year() % 100)
}

fn parse_us_date(s: &str) -> Option<NaiveDate> {
    let mut it = s.trim().split('/');
    let m: u32 = it.next()?.parse().ok()?;
    let d: u32 = it.next()?.parse().ok()?;
    let y: i32 = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    let y = if y < 100 { 2000 + y } else { y };
    NaiveDate::from_ymd_opt(y, m, d)
}

/// Parses one JHU-layout cumulative-count CSV.
pub fn parse_timeseries(csv_text: &str, kind: CountKind) -> Result<CountTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(csv_text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(e.to_string()))?
        .clone();
    if header.len() < META_COLUMNS {
        return Err(Error::Parse(format!(
            "expected at least {META_COLUMNS} columns, found {}",
            header.len()
        )));
    }
    let province_col = header.get(0).unwrap_or_default().trim();
    let country_col = header.get(1).unwrap_or_default().trim();
    if !province_col.to_ascii_lowercase().starts_with("province")
        || !country_col.to_ascii_lowercase().starts_with("country")
    {
        return Err(Error::Parse(format!(
            "header must start with Province/State,Country/Region; found {province_col:?},{country_col:?}"
        )));
    }
    let mut dates = Vec::with_capacity(header.len() - META_COLUMNS);
    for (i, h) in header.iter().enumerate().skip(META_COLUMNS) {
        let d = parse_us_date(h)
            .ok_or_else(|| Error::Parse(format!("column {} header {h:?} is not a date", i + 1)))?;
        dates.push(d);
    }
    // ascending column order
    let mut order: Vec<usize> = (0..dates.len()).collect();
    order.sort_by_key(|&i| dates[i]);
    if order.windows(2).any(|w| dates[w[0]] == dates[w[1]]) {
        return Err(Error::Parse("duplicate date column".into()));
    }
    let sorted_dates: Vec<NaiveDate> = order.iter().map(|&i| dates[i]).collect();

    let mut regions = BTreeMap::new();
    for (row_idx, rec) in rdr.records().enumerate() {
        let row = row_idx + 2; // 1-based, header is row 1
        let rec = rec.map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        let province = rec.get(0).unwrap_or_default().trim();
        let country = rec.get(1).unwrap_or_default().trim();
        if country.is_empty() {
            return Err(Error::Cell {
                row,
                column: 2,
                value: String::new(),
            });
        }
        let mut raw = Vec::with_capacity(dates.len());
        for (j, cell) in rec.iter().enumerate().skip(META_COLUMNS) {
            let v = parse_count(cell).ok_or_else(|| Error::Cell {
                row,
                column: j + 1,
                value: cell.to_string(),
            })?;
            raw.push(v);
        }
        let counts: Vec<u64> = order.iter().map(|&i| raw[i]).collect();
        let id = region_id(country, province);
        if regions.insert(id.clone(), counts).is_some() {
            return Err(Error::DuplicateRegion(id));
        }
    }
    Ok(CountTable {
        kind,
        dates: sorted_dates,
        regions,
    })
}

fn parse_count(cell: &str) -> Option<u64> {
    let t = cell.trim();
    if t.is_empty() {
        return Some(0);
    }
    if let Ok(v) = t.parse::<u64>() {
        return Some(v);
    }
    // some upstream snapshots write integral floats, e.g. "12.0"
    let f: f64 = t.parse().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f.is_finite()).then_some(f as u64)
}

/// Region population in millions, held constant over the window.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PopulationTable {
    pub entries: BTreeMap<String, f64>,
}

impl PopulationTable {
    pub fn parse(csv_text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let mut entries = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let id = rec.get(0).unwrap_or_default().trim().to_string();
            let cell = rec.get(1).unwrap_or_default();
            let pop: f64 = cell
                .trim()
                .parse()
                .ok()
                .filter(|p: &f64| *p > 0.0 && p.is_finite())
                .ok_or_else(|| Error::Cell {
                    row,
                    column: 2,
                    value: cell.to_string(),
                })?;
            if entries.insert(id.clone(), pop).is_some() {
                return Err(Error::DuplicateRegion(id));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.entries.get(id).copied()
    }
}

/// Lockdown start dates per region.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LockdownCalendar {
    pub entries: BTreeMap<String, NaiveDate>,
}

impl LockdownCalendar {
    /// Parses `region_id,lockdown_start_date`. Regions rejected by `known` and
    /// dates after `window_end` are load-time errors.
    pub fn parse(
        csv_text: &str,
        known: impl Fn(&str) -> bool,
        window_end: Option<NaiveDate>,
    ) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
        let mut entries = BTreeMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let id = rec.get(0).unwrap_or_default().trim().to_string();
            let cell = rec.get(1).unwrap_or_default();
            let date = NaiveDate::parse_from_str(cell.trim(), "%Y-%m-%d").map_err(|_| {
                Error::Cell {
                    row,
                    column: 2,
                    value: cell.to_string(),
                }
            })?;
            if !known(&id) {
                return Err(Error::UnknownRegion(id));
            }
            if window_end.is_some_and(|end| date > end) {
                return Err(Error::LockdownOutsideWindow { region: id, date });
            }
            if entries.insert(id.clone(), date).is_some() {
                return Err(Error::DuplicateRegion(id));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, id: &str) -> Option<NaiveDate> {
        self.entries.get(id).copied()
    }
}

/// Daily cumulative counts for one region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSeries {
    pub region_id: String,
    pub dates: Vec<NaiveDate>,
    pub confirmed: Vec<u64>,
    pub deaths: Vec<u64>,
    pub recovered: Vec<u64>,
    pub population_millions: f64,
    pub lockdown_start: Option<NaiveDate>,
    pub lockdown: Vec<bool>,
    /// Non-fatal data-quality notes, e.g. clamped cumulative decreases.
    pub warnings: Vec<String>,
}

impl RegionSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn index_of(&self, date: NaiveDate) -> Option<usize> {
        let first = *self.dates.first()?;
        let off = (date - first).num_days();
        (off >= 0 && (off as usize) < self.len()).then_some(off as usize)
    }

    /// Cumulative confirmed counts with day-over-day decreases clamped away
    /// (running maximum).
    pub fn clamped_confirmed(&self) -> Vec<u64> {
        let mut hi = 0;
        self.confirmed
            .iter()
            .map(|&c| {
                hi = hi.max(c);
                hi
            })
            .collect()
    }

    pub fn death_rate(&self) -> Option<f64> {
        ratio(*self.deaths.last()?, *self.confirmed.last()?)
    }

    pub fn recovery_rate(&self) -> Option<f64> {
        ratio(*self.recovered.last()?, *self.confirmed.last()?)
    }

    /// Keeps the first `len` days.
    pub fn truncated(&self, len: usize) -> RegionSeries {
        let len = len.min(self.len());
        RegionSeries {
            region_id: self.region_id.clone(),
            dates: self.dates[..len].to_vec(),
            confirmed: self.confirmed[..len].to_vec(),
            deaths: self.deaths[..len].to_vec(),
            recovered: self.recovered[..len].to_vec(),
            population_millions: self.population_millions,
            lockdown_start: self.lockdown_start,
            lockdown: self.lockdown[..len].to_vec(),
            warnings: self.warnings.clone(),
        }
    }

    /// Lockdown indicator for an arbitrary date, including dates past the
    /// end of the series.
    pub fn lockdown_on(&self, date: NaiveDate) -> bool {
        self.lockdown_start.is_some_and(|s| date >= s)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn lockdown_column(dates: &[NaiveDate], start: Option<NaiveDate>) -> Vec<bool> {
    dates
        .iter()
        .map(|d| start.is_some_and(|s| *d >= s))
        .collect()
}

/// Checks the structural invariants shared by assembled and aggregated series.
fn check_invariants(s: &RegionSeries) -> Vec<String> {
    let mut v = Vec::new();
    for (i, w) in s.dates.windows(2).enumerate() {
        if w[1] - w[0] != Duration::days(1) {
            v.push(format!("dates {} and {} are not consecutive (index {i})", w[0], w[1]));
        }
    }
    for t in 0..s.len() {
        if s.deaths[t] + s.recovered[t] > s.confirmed[t] {
            v.push(format!(
                "{}: deaths {} + recovered {} exceed confirmed {}",
                s.dates[t], s.deaths[t], s.recovered[t], s.confirmed[t]
            ));
        }
    }
    if !(s.population_millions > 0.0 && s.population_millions.is_finite()) {
        v.push(format!("population {} is not positive", s.population_millions));
    }
    v
}

fn monotonicity_warnings(id: &str, dates: &[NaiveDate], counts: &[u64], kind: CountKind) -> Vec<String> {
    counts
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0])
        .map(|(i, w)| {
            format!(
                "{id}: cumulative {kind} fell from {} to {} on {}; clamped to zero new cases",
                w[0],
                w[1],
                dates[i + 1]
            )
        })
        .collect()
}

/// Joins the three count tables, population and lockdown calendar for one region.
pub fn assemble_region(
    confirmed: &CountTable,
    deaths: &CountTable,
    recovered: &CountTable,
    population: &PopulationTable,
    calendar: &LockdownCalendar,
    id: &str,
) -> Result<RegionSeries> {
    for t in [deaths, recovered] {
        if t.dates != confirmed.dates {
            return Err(Error::AxisMismatch(format!(
                "{} table dates differ from confirmed table dates",
                t.kind
            )));
        }
    }
    let c = confirmed
        .get(id)
        .ok_or_else(|| Error::UnknownRegion(id.to_string()))?;
    let missing = |k: CountKind| Error::AxisMismatch(format!("region {id:?} missing from {k} table"));
    let d = deaths.get(id).ok_or_else(|| missing(CountKind::Deaths))?;
    let r = recovered
        .get(id)
        .ok_or_else(|| missing(CountKind::Recovered))?;
    let pop = population
        .get(id)
        .ok_or_else(|| Error::MissingPopulation(id.to_string()))?;
    let start = calendar.get(id);
    let dates = confirmed.dates.clone();
    let series = RegionSeries {
        region_id: id.to_string(),
        lockdown: lockdown_column(&dates, start),
        warnings: monotonicity_warnings(id, &dates, c, CountKind::Confirmed),
        dates,
        confirmed: c.to_vec(),
        deaths: d.to_vec(),
        recovered: r.to_vec(),
        population_millions: pop,
        lockdown_start: start,
    };
    let violations = check_invariants(&series);
    if violations.is_empty() {
        Ok(series)
    } else {
        Err(Error::InvariantViolations {
            region: id.to_string(),
            violations,
        })
    }
}

/// Sums province series into a country series. Population is summed; the
/// lockdown column comes from the country-level calendar entry.
pub fn aggregate_country(provinces: &[RegionSeries], calendar: &LockdownCalendar) -> Result<RegionSeries> {
    let first = provinces.first().ok_or(Error::EmptyAggregate)?;
    let country = country_of(&first.region_id).to_string();
    for p in provinces {
        if country_of(&p.region_id) != country {
            return Err(Error::AxisMismatch(format!(
                "{} does not belong to {country}",
                p.region_id
            )));
        }
        if p.dates != first.dates {
            return Err(Error::AxisMismatch(format!(
                "{} has a different date axis",
                p.region_id
            )));
        }
    }
    let n = first.len();
    let mut confirmed = vec![0u64; n];
    let mut deaths = vec![0u64; n];
    let mut recovered = vec![0u64; n];
    let mut population = 0.0;
    // sort so the floating-point population sum is order independent
    let mut ordered: Vec<&RegionSeries> = provinces.iter().collect();
    ordered.sort_by(|a, b| a.region_id.cmp(&b.region_id));
    for p in &ordered {
        for t in 0..n {
            confirmed[t] += p.confirmed[t];
            deaths[t] += p.deaths[t];
            recovered[t] += p.recovered[t];
        }
        population += p.population_millions;
    }
    let start = calendar.get(&country);
    let dates = first.dates.clone();
    let mut warnings = monotonicity_warnings(&country, &dates, &confirmed, CountKind::Confirmed);
    if provinces.len() == 1 {
        warnings = first.warnings.clone();
    }
    let series = RegionSeries {
        region_id: country.clone(),
        lockdown: lockdown_column(&dates, start),
        dates,
        confirmed,
        deaths,
        recovered,
        population_millions: population,
        lockdown_start: start,
        warnings,
    };
    let violations = check_invariants(&series);
    if violations.is_empty() {
        Ok(series)
    } else {
        Err(Error::InvariantViolations {
            region: country,
            violations,
        })
    }
}
