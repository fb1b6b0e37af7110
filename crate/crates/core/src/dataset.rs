//! A loaded data source: three count tables plus population and lockdown
//! tables, with region lookup and country aggregation.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::ingest::{
    aggregate_country, assemble_region, country_of, parse_timeseries, province_of, CountKind,
    CountTable, LockdownCalendar, PopulationTable, RegionSeries,
};

/// Embedded snapshot of the JHU CSSE data, 2020-01-22 through 2020-03-21.
pub mod fixture {
    pub const CONFIRMED: &str = include_str!("../fixtures/time_series_confirmed.csv");
    pub const DEATHS: &str = include_str!("../fixtures/time_series_deaths.csv");
    pub const RECOVERED: &str = include_str!("../fixtures/time_series_recovered.csv");
    pub const POPULATION: &str = include_str!("../fixtures/population.csv");
    pub const LOCKDOWN: &str = include_str!("../fixtures/lockdown.csv");
}

/// The six countries of the country-level study.
pub const STUDY_COUNTRIES: [&str; 6] = ["China", "India", "Iran", "Italy", "Korea, South", "US"];

const ALIASES: [(&str, &str); 6] = [
    ("south korea", "Korea, South"),
    ("korea", "Korea, South"),
    ("united states", "US"),
    ("usa", "US"),
    ("uk", "United Kingdom"),
    ("mainland china", "China"),
];

#[derive(Clone, Debug)]
pub struct Dataset {
    pub confirmed: CountTable,
    pub deaths: CountTable,
    pub recovered: CountTable,
    pub population: PopulationTable,
    pub calendar: LockdownCalendar,
}

/// One row of the country summary table.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SummaryRow {
    pub region: String,
    pub date: NaiveDate,
    pub confirmed: u64,
    pub deaths: u64,
    pub recovered: u64,
}

impl SummaryRow {
    pub fn death_pct(&self) -> f64 {
        pct(self.deaths, self.confirmed)
    }

    pub fn recovered_pct(&self) -> f64 {
        pct(self.recovered, self.confirmed)
    }
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl Dataset {
    pub fn fixture() -> Self {
        Self::from_texts(
            fixture::CONFIRMED,
            fixture::DEATHS,
            fixture::RECOVERED,
            fixture::POPULATION,
            Some(fixture::LOCKDOWN),
        )
        .expect("embedded fixture is well formed")
    }

    pub fn from_texts(
        confirmed: &str,
        deaths: &str,
        recovered: &str,
        population: &str,
        lockdown: Option<&str>,
    ) -> Result<Self> {
        let confirmed = parse_timeseries(confirmed, CountKind::Confirmed)?;
        let deaths = parse_timeseries(deaths, CountKind::Deaths)?;
        let recovered = parse_timeseries(recovered, CountKind::Recovered)?;
        let population = PopulationTable::parse(population)?;
        let calendar = match lockdown {
            Some(text) => {
                let known = |id: &str| {
                    confirmed.regions.contains_key(id)
                        || confirmed.regions.keys().any(|k| country_of(k) == id)
                };
                LockdownCalendar::parse(text, known, confirmed.dates.last().copied())?
            }
            None => LockdownCalendar::default(),
        };
        Ok(Self {
            confirmed,
            deaths,
            recovered,
            population,
            calendar,
        })
    }

    pub fn from_paths(
        confirmed: &Path,
        deaths: &Path,
        recovered: &Path,
        population: &Path,
        lockdown: Option<&Path>,
    ) -> Result<Self> {
        let read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))
        };
        let lock = lockdown.map(read).transpose()?;
        Self::from_texts(
            &read(confirmed)?,
            &read(deaths)?,
            &read(recovered)?,
            &read(population)?,
            lock.as_deref(),
        )
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.confirmed.dates
    }

    /// Province-level region ids belonging to `country`.
    pub fn provinces_of(&self, country: &str) -> Vec<String> {
        self.confirmed
            .regions
            .keys()
            .filter(|k| country_of(k) == country && province_of(k).is_some())
            .cloned()
            .collect()
    }

    /// Provinces of `country` that have a population entry (for China this
    /// is the 31 mainland provinces plus the two SARs).
    pub fn modelled_provinces(&self, country: &str, exclude: &[&str]) -> Vec<String> {
        self.provinces_of(country)
            .into_iter()
            .filter(|id| !exclude.iter().any(|e| province_of(id) == Some(*e)))
            .collect()
    }

    /// Resolves a user-supplied name to a region id. Accepts exact ids,
    /// province names, country names, and a few common aliases.
    pub fn resolve(&self, name: &str) -> Option<String> {
        let trimmed = name.trim();
        let lower = trimmed.to_ascii_lowercase();
        let target = ALIASES
            .iter()
            .find(|(a, _)| *a == lower)
            .map_or(trimmed, |(_, canonical)| canonical);
        let keys = self.confirmed.regions.keys();
        if self.confirmed.regions.contains_key(target) {
            return Some(target.to_string());
        }
        for k in keys.clone() {
            if k.eq_ignore_ascii_case(target) {
                return Some(k.clone());
            }
        }
        for k in keys.clone() {
            if country_of(k).eq_ignore_ascii_case(target) {
                return Some(country_of(k).to_string());
            }
        }
        let matches: Vec<&String> = keys
            .filter(|k| province_of(k).is_some_and(|p| p.eq_ignore_ascii_case(target)))
            .collect();
        (matches.len() == 1).then(|| matches[0].clone())
    }

    /// Assembles a region series. Country ids whose data is split by
    /// province are aggregated.
    pub fn region(&self, id: &str) -> Result<RegionSeries> {
        if self.confirmed.regions.contains_key(id) {
            return assemble_region(
                &self.confirmed,
                &self.deaths,
                &self.recovered,
                &self.population,
                &self.calendar,
                id,
            );
        }
        let provinces = self.provinces_of(id);
        if provinces.is_empty() {
            return Err(Error::UnknownRegion(id.to_string()));
        }
        let parts = provinces
            .iter()
            .map(|p| self.region(p))
            .collect::<Result<Vec<_>>>()?;
        aggregate_country(&parts, &self.calendar)
    }

    /// Final-day totals for a region, or for the whole table when `region`
    /// is `World`.
    pub fn summary(&self, region: &str) -> Result<SummaryRow> {
        let date = *self
            .dates()
            .last()
            .ok_or_else(|| Error::InsufficientData("empty date axis".into()))?;
        let last = |t: &CountTable, pred: &dyn Fn(&str) -> bool| -> u64 {
            t.regions
                .iter()
                .filter(|(k, _)| pred(k))
                .filter_map(|(_, v)| v.last())
                .sum()
        };
        let pred: Box<dyn Fn(&str) -> bool> = if region.eq_ignore_ascii_case("world") {
            Box::new(|_| true)
        } else {
            let id = self
                .resolve(region)
                .ok_or_else(|| Error::UnknownRegion(region.to_string()))?;
            if self.confirmed.regions.contains_key(&id) {
                Box::new(move |k| k == id)
            } else {
                Box::new(move |k| country_of(k) == id)
            }
        };
        let label = if region.eq_ignore_ascii_case("world") {
            "World".to_string()
        } else {
            self.resolve(region).unwrap_or_else(|| region.to_string())
        };
        Ok(SummaryRow {
            region: label,
            date,
            confirmed: last(&self.confirmed, &*pred),
            deaths: last(&self.deaths, &*pred),
            recovered: last(&self.recovered, &*pred),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_window() {
        let ds = Dataset::fixture();
        assert_eq!(ds.dates().len(), 60);
        assert_eq!(ds.dates()[0], NaiveDate::from_ymd_opt(2020, 1, 22).unwrap());
        assert_eq!(ds.dates()[59], NaiveDate::from_ymd_opt(2020, 3, 21).unwrap());
    }

    #[test]
    fn hubei_final_count() {
        let ds = Dataset::fixture();
        let hubei = ds.region("China/Hubei").unwrap();
        assert_eq!(*hubei.confirmed.last().unwrap(), 67800);
        assert_eq!(*hubei.deaths.last().unwrap(), 3139);
    }

    #[test]
    fn china_assembly_matches_country_table() {
        let ds = Dataset::fixture();
        let china = ds.region("China").unwrap();
        assert_eq!(*china.confirmed.last().unwrap(), 81305);
        assert_eq!(*china.deaths.last().unwrap(), 3259);
        assert_eq!(*china.recovered.last().unwrap(), 71857);
        assert_eq!(china.lockdown_start, NaiveDate::from_ymd_opt(2020, 2, 2));
    }

    #[test]
    fn thirty_one_mainland_provinces() {
        let ds = Dataset::fixture();
        let p = ds.modelled_provinces("China", &["Hong Kong", "Macau"]);
        assert_eq!(p.len(), 31);
    }

    #[test]
    fn resolves_names() {
        let ds = Dataset::fixture();
        assert_eq!(ds.resolve("Hubei").as_deref(), Some("China/Hubei"));
        assert_eq!(ds.resolve("south korea").as_deref(), Some("Korea, South"));
        assert_eq!(ds.resolve("china").as_deref(), Some("China"));
        assert_eq!(ds.resolve("Atlantis"), None);
    }
}
