//! Reading and joining the raw inputs.
//!
//! Every parser keeps the country names exactly as the source writes them.
//! [`reconcile_countries`] maps the names onto canonical keys through an
//! [`AliasTable`] and inner-joins the three sources.

mod aliases;
mod ecdc;
mod jhu;
mod reconcile;
mod worldbank;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use aliases::{normalize_name, AliasTable};
pub use ecdc::parse_ecdc;
pub use jhu::parse_jhu;
pub use reconcile::{
    reconcile_countries, DropReport, DroppedCountry, JoinedCountry, JoinedDataset, PanelFile,
    SourceSide,
};
pub use worldbank::{
    impute_regional_averages, parse_worldbank, CovariateRecord, ImputedFlags, Region,
};

use crate::error::{Error, Result};
use crate::regimes::parse_democracy;
use crate::Outcome;

/// Last day of the period analysed in the reference runs.
pub fn default_end_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 6, 30).expect("valid date")
}

/// One country's cumulative counts on consecutive days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySeries {
    pub country_id: String,
    pub name: String,
    /// Filled from the covariate file when the sources are joined.
    pub population: Option<u64>,
    pub latitude: Option<f64>,
    pub dates: Vec<NaiveDate>,
    pub cum_cases: Vec<u64>,
    pub cum_deaths: Vec<u64>,
}

impl CountrySeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn cumulative(&self, outcome: Outcome) -> &[u64] {
        match outcome {
            Outcome::Cases => &self.cum_cases,
            Outcome::Deaths => &self.cum_deaths,
        }
    }

    pub fn pop_millions(&self) -> Option<f64> {
        self.population.filter(|p| *p > 0).map(|p| p as f64 / 1e6)
    }

    /// Index of the first day with a positive case count.
    pub fn first_case_index(&self) -> Option<usize> {
        self.cum_cases.iter().position(|&c| c > 0)
    }

    /// Drop every date after `end`.
    pub fn truncate_after(&mut self, end: NaiveDate) {
        let keep = self.dates.partition_point(|d| *d <= end);
        self.dates.truncate(keep);
        self.cum_cases.truncate(keep);
        self.cum_deaths.truncate(keep);
    }

    /// Checks lengths, daily contiguity and population.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::Format {
            file: self.country_id.clone(),
            reason,
        };
        if self.cum_cases.len() != self.dates.len() || self.cum_deaths.len() != self.dates.len() {
            return Err(bad("count vectors differ in length from the dates".into()));
        }
        if let Some(w) = self
            .dates
            .windows(2)
            .find(|w| w[0].succ_opt() != Some(w[1]))
        {
            return Err(bad(format!("dates jump from {} to {}", w[0], w[1])));
        }
        if self.population == Some(0) {
            return Err(bad("population is zero".into()));
        }
        Ok(())
    }
}

/// Which epidemic feed drives the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Jhu,
    Ecdc,
}

/// File names used inside a snapshot directory.
pub mod files {
    pub const JHU_CONFIRMED: &str = "time_series_covid19_confirmed_global.csv";
    pub const JHU_DEATHS: &str = "time_series_covid19_deaths_global.csv";
    pub const ECDC: &str = "ecdc.csv";
    pub const DEMOCRACY: &str = "democracy.csv";
    pub const WORLDBANK: &str = "worldbank.csv";
    pub const ALIASES: &str = "aliases.csv";
}

/// Locations of the raw inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcePaths {
    /// Directory holding the two JHU global time-series files.
    pub jhu: Option<PathBuf>,
    pub ecdc: Option<PathBuf>,
    pub democracy: PathBuf,
    pub worldbank: PathBuf,
    /// Defaults to the alias table shipped with the crate.
    pub aliases: Option<PathBuf>,
}

impl SourcePaths {
    /// The conventional layout of a snapshot directory. Optional files are
    /// only referenced when they exist.
    pub fn from_dir(dir: &Path) -> Self {
        let opt = |p: PathBuf| p.exists().then_some(p);
        SourcePaths {
            jhu: dir
                .join(files::JHU_CONFIRMED)
                .exists()
                .then(|| dir.to_path_buf()),
            ecdc: opt(dir.join(files::ECDC)),
            democracy: dir.join(files::DEMOCRACY),
            worldbank: dir.join(files::WORLDBANK),
            aliases: opt(dir.join(files::ALIASES)),
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// Parse, impute and join the inputs for `source`, keeping dates up to `end`.
///
/// ECDC reports carry no coordinates, so with that source the latitudes are
/// taken from the JHU files when `paths.jhu` points at them. The snapshot
/// label is a digest of the bytes of every file read.
pub fn load_dataset(
    paths: &SourcePaths,
    source: DataSource,
    end: NaiveDate,
) -> Result<JoinedDataset> {
    let mut hasher = Sha256::new();
    let mut consumed = |bytes: &[u8]| {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    };

    let (series_bytes, series_label) = match source {
        DataSource::Jhu => {
            let dir = paths.jhu.as_deref().ok_or_else(|| {
                Error::InvalidParameter("JHU source selected but no JHU directory given".into())
            })?;
            let c = read_file(&dir.join(files::JHU_CONFIRMED))?;
            let d = read_file(&dir.join(files::JHU_DEATHS))?;
            (vec![c, d], display(dir))
        }
        DataSource::Ecdc => {
            let f = paths.ecdc.as_deref().ok_or_else(|| {
                Error::InvalidParameter("ECDC source selected but no ECDC file given".into())
            })?;
            (vec![read_file(f)?], display(f))
        }
    };
    let democracy = read_file(&paths.democracy)?;
    let worldbank = read_file(&paths.worldbank)?;
    let alias_bytes = paths.aliases.as_deref().map(read_file).transpose()?;
    let latitude_bytes = match (source, paths.jhu.as_deref()) {
        (DataSource::Ecdc, Some(dir))
            if dir.join(files::JHU_CONFIRMED).is_file()
                && dir.join(files::JHU_DEATHS).is_file() =>
        {
            Some((
                read_file(&dir.join(files::JHU_CONFIRMED))?,
                read_file(&dir.join(files::JHU_DEATHS))?,
            ))
        }
        _ => None,
    };

    for b in &series_bytes {
        consumed(b);
    }
    consumed(&democracy);
    consumed(&worldbank);
    if let Some(a) = &alias_bytes {
        consumed(a);
    }
    if let Some((c, d)) = &latitude_bytes {
        consumed(c);
        consumed(d);
    }
    let snapshot = hex::encode(&hasher.finalize()[..8]);

    let ((series, regimes), (covariates, aliases)) = rayon::join(
        || {
            rayon::join(
                || match source {
                    DataSource::Jhu => parse_jhu(&series_bytes[0][..], &series_bytes[1][..]),
                    DataSource::Ecdc => parse_ecdc(&series_bytes[0][..], &series_label),
                },
                || parse_democracy(&democracy[..], &display(&paths.democracy)),
            )
        },
        || {
            rayon::join(
                || {
                    parse_worldbank(&worldbank[..], &display(&paths.worldbank))
                        .and_then(impute_regional_averages)
                },
                || match &alias_bytes {
                    Some(b) => AliasTable::from_reader(&b[..]),
                    None => Ok(AliasTable::builtin()),
                },
            )
        },
    );
    let mut series = series?;
    for s in &mut series {
        s.truncate_after(end);
    }
    series.retain(|s| !s.is_empty());

    let aliases = aliases?;
    if let Some((c, d)) = &latitude_bytes {
        let latitudes: BTreeMap<String, f64> = parse_jhu(&c[..], &d[..])?
            .into_iter()
            .filter_map(|s| Some((aliases.resolve(&s.country_id), s.latitude?)))
            .collect();
        for s in &mut series {
            if s.latitude.is_none() {
                s.latitude = latitudes.get(&aliases.resolve(&s.country_id)).copied();
            }
        }
    }

    let mut joined = reconcile_countries(series, regimes?, covariates?, &aliases);
    joined.source = source;
    joined.end_date = end;
    joined.snapshot = snapshot;
    Ok(joined)
}
