//! Forensic tests for manipulated epidemic time series.
//!
//! Two detectors are provided:
//!
//! * a smoothness test, which regresses the log squared deviation of daily
//!   counts from their 7-day centered moving average on a democracy score
//!   with country-clustered standard errors ([`smoothness`]);
//! * a first-digit test, which pools the leading digits of cumulative counts
//!   taken on fast-growth days and compares them with Benford's law using a
//!   Pearson chi-squared statistic ([`benford`]).
//!
//! The [`ingest`] module reads the JHU CSSE wide files, the ECDC long file,
//! a democracy-score table and World Bank covariates, and joins them on
//! ISO 3166 alpha-3 codes. [`synth`] generates synthetic epidemics with a
//! known amount of smoothing so both detectors can be checked against
//! ground truth.

pub mod benford;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod regimes;
pub mod regression;
pub mod report;
pub mod smoothness;
pub mod synth;
pub mod timeseries;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Which count a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Cases,
    Deaths,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Cases, Outcome::Deaths];

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Cases => "cases",
            Outcome::Deaths => "deaths",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}
