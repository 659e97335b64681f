//! Democracy scores and the EIU regime classification.
//!
//! Four indices are carried per country. Only the EIU score is mandatory;
//! the others may be missing and are put on the EIU's 0–10 scale by
//! [`normalize_score`] before entering a regression.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// EIU regime type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeClass {
    Authoritarian,
    Hybrid,
    FlawedDemocracy,
    FullDemocracy,
}

impl RegimeClass {
    pub const ALL: [RegimeClass; 4] = [
        RegimeClass::Authoritarian,
        RegimeClass::Hybrid,
        RegimeClass::FlawedDemocracy,
        RegimeClass::FullDemocracy,
    ];

    pub fn label(self) -> &'static str {
        match self {
            RegimeClass::Authoritarian => "authoritarian",
            RegimeClass::Hybrid => "hybrid",
            RegimeClass::FlawedDemocracy => "flawed_democracy",
            RegimeClass::FullDemocracy => "full_democracy",
        }
    }

    /// Flawed and full democracies.
    pub fn is_democracy(self) -> bool {
        matches!(
            self,
            RegimeClass::FlawedDemocracy | RegimeClass::FullDemocracy
        )
    }
}

impl std::fmt::Display for RegimeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Classify an EIU Democracy Index score. Each boundary (4, 6, 8) belongs to
/// the lower class.
pub fn classify_eiu(score: f64) -> Result<RegimeClass> {
    IndexSource::Eiu.check(score)?;
    Ok(if score <= 4.0 {
        RegimeClass::Authoritarian
    } else if score <= 6.0 {
        RegimeClass::Hybrid
    } else if score <= 8.0 {
        RegimeClass::FlawedDemocracy
    } else {
        RegimeClass::FullDemocracy
    })
}

/// Source of a democracy score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum IndexSource {
    /// Economist Intelligence Unit Democracy Index, 0–10.
    Eiu,
    /// Freedom House Freedom in the World aggregate, 0–100.
    Fh,
    /// V-Dem electoral democracy index, 0–1.
    Vdem,
    /// Polity5 modified polity score, -10–10.
    Polity5,
}

impl IndexSource {
    pub const ALL: [IndexSource; 4] = [
        IndexSource::Eiu,
        IndexSource::Fh,
        IndexSource::Vdem,
        IndexSource::Polity5,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IndexSource::Eiu => "eiu",
            IndexSource::Fh => "fh",
            IndexSource::Vdem => "vdem",
            IndexSource::Polity5 => "polity5",
        }
    }

    /// Raw range of the index.
    pub fn range(self) -> (f64, f64) {
        match self {
            IndexSource::Eiu => (0.0, 10.0),
            IndexSource::Fh => (0.0, 100.0),
            IndexSource::Vdem => (0.0, 1.0),
            IndexSource::Polity5 => (-10.0, 10.0),
        }
    }

    fn check(self, raw: f64) -> Result<()> {
        let (min, max) = self.range();
        if raw.is_finite() && (min..=max).contains(&raw) {
            Ok(())
        } else {
            Err(Error::ScoreOutOfRange {
                index: self.label(),
                value: raw,
                min,
                max,
            })
        }
    }
}

impl std::fmt::Display for IndexSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Map a raw score onto the EIU 0–10 scale.
pub fn normalize_score(source: IndexSource, raw: f64) -> Result<f64> {
    source.check(raw)?;
    Ok(match source {
        IndexSource::Eiu => raw,
        IndexSource::Fh => raw / 10.0,
        IndexSource::Vdem => raw * 10.0,
        IndexSource::Polity5 => (raw + 10.0) / 2.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRecord {
    pub country_id: String,
    pub eiu_score: f64,
    pub fh_score_raw: Option<f64>,
    pub vdem_score_raw: Option<f64>,
    pub polity5_raw: Option<i32>,
    pub regime_class: RegimeClass,
}

impl RegimeRecord {
    /// Validates every score and derives the regime class from the EIU score.
    pub fn new(
        country_id: impl Into<String>,
        eiu_score: f64,
        fh_score_raw: Option<f64>,
        vdem_score_raw: Option<f64>,
        polity5_raw: Option<i32>,
    ) -> Result<Self> {
        let regime_class = classify_eiu(eiu_score)?;
        if let Some(fh) = fh_score_raw {
            IndexSource::Fh.check(fh)?;
        }
        if let Some(v) = vdem_score_raw {
            IndexSource::Vdem.check(v)?;
        }
        if let Some(p) = polity5_raw {
            IndexSource::Polity5.check(p as f64)?;
        }
        Ok(RegimeRecord {
            country_id: country_id.into(),
            eiu_score,
            fh_score_raw,
            vdem_score_raw,
            polity5_raw,
            regime_class,
        })
    }

    pub fn raw(&self, source: IndexSource) -> Option<f64> {
        match source {
            IndexSource::Eiu => Some(self.eiu_score),
            IndexSource::Fh => self.fh_score_raw,
            IndexSource::Vdem => self.vdem_score_raw,
            IndexSource::Polity5 => self.polity5_raw.map(f64::from),
        }
    }

    /// Score on the 0–10 scale, `None` when the source has no value.
    pub fn normalized(&self, source: IndexSource) -> Option<f64> {
        // Ranges were validated on construction.
        self.raw(source)
            .map(|raw| normalize_score(source, raw).expect("validated score"))
    }
}

/// Read the democracy-score table.
///
/// Header: `country,eiu,fh,vdem,polity5`. Empty cells are allowed for every
/// column but `eiu`. `country_id` is the name as written; it is resolved to a
/// canonical code when the sources are reconciled.
pub fn parse_democracy<R: Read>(reader: R, file: &str) -> Result<Vec<RegimeRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Format {
                file: file.to_string(),
                reason: format!("missing column {name:?}"),
            })
    };
    let (c_country, c_eiu, c_fh, c_vdem, c_polity) = (
        col("country")?,
        col("eiu")?,
        col("fh")?,
        col("vdem")?,
        col("polity5")?,
    );

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let cell = |c: usize, name: &str| -> Result<Option<f64>> {
            let v = rec.get(c).unwrap_or("");
            if v.is_empty() {
                return Ok(None);
            }
            v.parse::<f64>().map(Some).map_err(|_| Error::BadCell {
                file: file.to_string(),
                row,
                column: name.to_string(),
                value: v.to_string(),
            })
        };
        let eiu = cell(c_eiu, "eiu")?.ok_or_else(|| Error::BadCell {
            file: file.to_string(),
            row,
            column: "eiu".into(),
            value: String::new(),
        })?;
        let polity = match cell(c_polity, "polity5")? {
            Some(p) if p.fract() == 0.0 => Some(p as i32),
            Some(p) => {
                return Err(Error::BadCell {
                    file: file.to_string(),
                    row,
                    column: "polity5".into(),
                    value: p.to_string(),
                })
            }
            None => None,
        };
        out.push(RegimeRecord::new(
            rec.get(c_country).unwrap_or(""),
            eiu,
            cell(c_fh, "fh")?,
            cell(c_vdem, "vdem")?,
            polity,
        )?);
    }
    Ok(out)
}
