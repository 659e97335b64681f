use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AliasTable, CountrySeries, CovariateRecord, DataSource};
use crate::error::{Error, Result};
use crate::regimes::RegimeRecord;

/// One of the three joined inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSide {
    Series,
    Regimes,
    Covariates,
}

impl SourceSide {
    pub fn label(self) -> &'static str {
        match self {
            SourceSide::Series => "epidemic series",
            SourceSide::Regimes => "democracy scores",
            SourceSide::Covariates => "covariates",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedCountry {
    /// Name as written in the source.
    pub name: String,
    pub key: String,
    /// Sources with no matching country, or empty for a duplicate key.
    pub missing_from: Vec<SourceSide>,
}

/// Countries that did not survive the join, listed under the source they
/// came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub series: Vec<DroppedCountry>,
    pub regimes: Vec<DroppedCountry>,
    pub covariates: Vec<DroppedCountry>,
}

impl DropReport {
    pub fn side(&self, side: SourceSide) -> &[DroppedCountry] {
        match side {
            SourceSide::Series => &self.series,
            SourceSide::Regimes => &self.regimes,
            SourceSide::Covariates => &self.covariates,
        }
    }

    fn side_mut(&mut self, side: SourceSide) -> &mut Vec<DroppedCountry> {
        match side {
            SourceSide::Series => &mut self.series,
            SourceSide::Regimes => &mut self.regimes,
            SourceSide::Covariates => &mut self.covariates,
        }
    }

    pub fn total(&self) -> usize {
        self.series.len() + self.regimes.len() + self.covariates.len()
    }

    /// Whether a country with this key was dropped from `side`.
    pub fn contains(&self, side: SourceSide, key: &str) -> bool {
        self.side(side).iter().any(|d| d.key == key)
    }

    /// Plain-text listing, one country per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for side in [
            SourceSide::Series,
            SourceSide::Regimes,
            SourceSide::Covariates,
        ] {
            let list = self.side(side);
            let _ = writeln!(out, "dropped from {} ({}):", side.label(), list.len());
            for d in list {
                if d.missing_from.is_empty() {
                    let _ = writeln!(out, "  {} [{}]: duplicate key", d.name, d.key);
                } else {
                    let missing: Vec<_> = d.missing_from.iter().map(|s| s.label()).collect();
                    let _ = writeln!(
                        out,
                        "  {} [{}]: not in {}",
                        d.name,
                        d.key,
                        missing.join(", ")
                    );
                }
            }
        }
        out
    }
}

/// A country present in all three sources, with every `country_id` set to
/// the canonical key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedCountry {
    pub series: CountrySeries,
    pub regime: RegimeRecord,
    pub covariates: CovariateRecord,
}

impl JoinedCountry {
    pub fn country_id(&self) -> &str {
        &self.series.country_id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoinedDataset {
    pub source: DataSource,
    pub end_date: NaiveDate,
    /// Digest of the input files.
    pub snapshot: String,
    /// Sorted by country key.
    pub countries: Vec<JoinedCountry>,
    pub drops: DropReport,
}

/// Inner join of the three sources on canonical keys.
///
/// Population and display name on the series are taken from the covariate
/// record and the alias table. Drops are reported, never fatal.
pub fn reconcile_countries(
    series: Vec<CountrySeries>,
    regimes: Vec<RegimeRecord>,
    covariates: Vec<CovariateRecord>,
    aliases: &AliasTable,
) -> JoinedDataset {
    let mut drops = DropReport::default();

    fn index<T>(
        items: Vec<T>,
        name: impl Fn(&T) -> String,
        aliases: &AliasTable,
        side: SourceSide,
        drops: &mut DropReport,
    ) -> BTreeMap<String, (String, T)> {
        let mut map = BTreeMap::new();
        for item in items {
            let n = name(&item);
            let key = aliases.resolve(&n);
            match map.entry(key) {
                Entry::Occupied(e) => drops.side_mut(side).push(DroppedCountry {
                    name: n,
                    key: e.key().clone(),
                    missing_from: Vec::new(),
                }),
                Entry::Vacant(e) => {
                    e.insert((n, item));
                }
            }
        }
        map
    }

    let mut s = index(
        series,
        |s| s.country_id.clone(),
        aliases,
        SourceSide::Series,
        &mut drops,
    );
    let mut r = index(
        regimes,
        |r| r.country_id.clone(),
        aliases,
        SourceSide::Regimes,
        &mut drops,
    );
    let mut c = index(
        covariates,
        |c| c.country_id.clone(),
        aliases,
        SourceSide::Covariates,
        &mut drops,
    );

    let keys: Vec<String> = s.keys().chain(r.keys()).chain(c.keys()).cloned().collect();
    let mut countries = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for key in keys {
        if !seen.insert(key.clone()) {
            continue;
        }
        let present = [
            s.contains_key(&key),
            r.contains_key(&key),
            c.contains_key(&key),
        ];
        let sides = [
            SourceSide::Series,
            SourceSide::Regimes,
            SourceSide::Covariates,
        ];
        if present.iter().all(|p| *p) {
            let (_, mut series) = s.remove(&key).expect("present");
            let (_, mut regime) = r.remove(&key).expect("present");
            let (_, mut cov) = c.remove(&key).expect("present");
            if let Some(name) = aliases.display_name(&key) {
                series.name = name.to_string();
            }
            series.country_id = key.clone();
            series.population = cov.population;
            regime.country_id = key.clone();
            cov.country_id = key.clone();
            countries.push(JoinedCountry {
                series,
                regime,
                covariates: cov,
            });
            continue;
        }
        let missing_from: Vec<SourceSide> = sides
            .iter()
            .zip(present)
            .filter(|(_, p)| !p)
            .map(|(side, _)| *side)
            .collect();
        for (side, here) in sides.iter().zip(present) {
            if !here {
                continue;
            }
            let name = match side {
                SourceSide::Series => s.remove(&key).map(|x| x.0),
                SourceSide::Regimes => r.remove(&key).map(|x| x.0),
                SourceSide::Covariates => c.remove(&key).map(|x| x.0),
            }
            .expect("present");
            drops.side_mut(*side).push(DroppedCountry {
                name,
                key: key.clone(),
                missing_from: missing_from.clone(),
            });
        }
    }
    countries.sort_by(|a, b| a.series.country_id.cmp(&b.series.country_id));

    JoinedDataset {
        source: DataSource::Jhu,
        end_date: super::default_end_date(),
        snapshot: String::new(),
        countries,
        drops,
    }
}

/// Self-describing JSON form of a [`JoinedDataset`], the exchange format
/// between `ingest` and the analysis commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelFile {
    pub format: String,
    pub version: u32,
    #[serde(flatten)]
    pub dataset: JoinedDataset,
}

impl PanelFile {
    pub const FORMAT: &'static str = "covid-forensics/joined-panel";
    pub const VERSION: u32 = 1;

    pub fn new(dataset: JoinedDataset) -> Self {
        PanelFile {
            format: Self::FORMAT.to_string(),
            version: Self::VERSION,
            dataset,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<JoinedDataset> {
        let file: PanelFile = serde_json::from_str(text)?;
        if file.format != Self::FORMAT || file.version != Self::VERSION {
            return Err(Error::Format {
                file: "panel".into(),
                reason: format!(
                    "expected {} v{}, found {} v{}",
                    Self::FORMAT,
                    Self::VERSION,
                    file.format,
                    file.version
                ),
            });
        }
        Ok(file.dataset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ImputedFlags, Region};

    fn series(name: &str) -> CountrySeries {
        CountrySeries {
            country_id: name.into(),
            name: name.into(),
            population: None,
            latitude: Some(10.0),
            dates: vec![NaiveDate::from_ymd_opt(2020, 3, 1).unwrap()],
            cum_cases: vec![1],
            cum_deaths: vec![0],
        }
    }

    fn regime(name: &str) -> RegimeRecord {
        RegimeRecord::new(name, 5.0, None, None, None).unwrap()
    }

    fn cov(name: &str) -> CovariateRecord {
        CovariateRecord {
            country_id: name.into(),
            region: Region::NorthAmerica,
            population: Some(2_000_000),
            gdp_per_capita: Some(1.0),
            trade_pct_gdp: Some(1.0),
            health_pct_gdp: Some(1.0),
            share_65plus: Some(1.0),
            imputed_flags: ImputedFlags::default(),
        }
    }

    #[test]
    fn aliases_join_naming_variants() {
        let j = reconcile_countries(
            vec![series("US")],
            vec![regime("United States")],
            vec![cov("United States")],
            &AliasTable::builtin(),
        );
        assert_eq!(j.countries.len(), 1);
        let c = &j.countries[0];
        assert_eq!(c.country_id(), "USA");
        assert_eq!(c.regime.country_id, "USA");
        assert_eq!(c.series.population, Some(2_000_000));
        assert_eq!(j.drops.total(), 0);
    }

    #[test]
    fn scored_country_without_series_is_reported() {
        let j = reconcile_countries(
            vec![series("France")],
            vec![regime("France"), regime("Comoros"), regime("Lesotho")],
            vec![cov("France"), cov("Comoros"), cov("Lesotho")],
            &AliasTable::builtin(),
        );
        assert_eq!(j.countries.len(), 1);
        assert!(j.drops.contains(SourceSide::Regimes, "COM"));
        assert!(j.drops.contains(SourceSide::Covariates, "LSO"));
        assert_eq!(j.drops.regimes[0].missing_from, vec![SourceSide::Series]);
        assert!(j
            .drops
            .to_text()
            .contains("Comoros [COM]: not in epidemic series"));
    }

    #[test]
    fn identical_names_join_without_aliases() {
        let names = ["Avalon", "Brigadoon", "Cockaigne"];
        let j = reconcile_countries(
            names.iter().map(|n| series(n)).collect(),
            names.iter().map(|n| regime(n)).collect(),
            names.iter().map(|n| cov(n)).collect(),
            &AliasTable::empty(),
        );
        assert_eq!(j.countries.len(), 3);
        assert_eq!(j.drops.total(), 0);
    }

    #[test]
    fn every_drop_is_reported_once() {
        let j = reconcile_countries(
            vec![series("A"), series("B"), series("Diamond Princess")],
            vec![regime("A"), regime("C")],
            vec![cov("A"), cov("B"), cov("C"), cov("D")],
            &AliasTable::empty(),
        );
        assert_eq!(j.countries.len(), 1);
        assert!(j.countries.len() <= 2);
        let all: Vec<_> = [
            SourceSide::Series,
            SourceSide::Regimes,
            SourceSide::Covariates,
        ]
        .iter()
        .flat_map(|s| j.drops.side(*s).iter().map(move |d| (*s, d.key.clone())))
        .collect();
        // 2 series + 1 regime + 3 covariate records were not joined.
        assert_eq!(all.len(), 6);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn panel_file_round_trip() {
        let j = reconcile_countries(
            vec![series("A")],
            vec![regime("A")],
            vec![cov("A")],
            &AliasTable::empty(),
        );
        let text = PanelFile::new(j.clone()).to_json().unwrap();
        assert!(text.contains(PanelFile::FORMAT));
        assert_eq!(PanelFile::from_json(&text).unwrap(), j);
        let wrong = text.replace(PanelFile::FORMAT, "something-else");
        assert!(PanelFile::from_json(&wrong).is_err());
    }
}
