//! CSV reports with full-precision JSON sidecars.
//!
//! Every CSV starts with one comment line naming the tool version, the input
//! snapshot and a digest of the analysis settings. Numbers in the CSV are
//! rounded to two decimals; the sidecar `<name>.json` holds the same results
//! unrounded.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::benford::BenfordReport;
use crate::error::{Error, Result};
use crate::regimes::IndexSource;
use crate::regression::{significance_stars, Term};
use crate::smoothness::{BurdenSummary, CountryDeviation, RegimeDay, TableColumn};
use crate::synth::PowerRow;
use crate::Outcome;

/// File names of the reports.
pub mod names {
    pub const TABLE1: &str = "table1";
    pub const TABLE_S1: &str = "table_s1";
    pub const TABLE_S2: &str = "table_s2";
    pub const FIGURE1: &str = "figure1";
    pub const FIGURE2: &str = "figure2";
    pub const FIGURE3: &str = "figure3";
    pub const FIGURE_S1: &str = "figure_s1";
    pub const FIGURE_S2: &str = "figure_s2";
    pub const POWER: &str = "power";
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportHeader {
    pub version: String,
    pub snapshot: String,
    pub config: String,
    /// RFC 3339 time of writing; absent for reproducible output.
    pub generated: Option<String>,
}

impl ReportHeader {
    /// `config` is hashed through its JSON form.
    pub fn new<C: Serialize>(snapshot: &str, config: &C, timestamp: bool) -> Result<Self> {
        let json = serde_json::to_vec(config)?;
        Ok(ReportHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            snapshot: snapshot.to_string(),
            config: hex::encode(&Sha256::digest(&json)[..8]),
            generated: timestamp
                .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        })
    }

    pub fn line(&self) -> String {
        let mut s = format!(
            "# covid-forensics {} | snapshot {} | config {}",
            self.version, self.snapshot, self.config
        );
        if let Some(t) = &self.generated {
            s.push_str(" | generated ");
            s.push_str(t);
        }
        s
    }
}

/// A rendered report: CSV rows plus the unrounded data behind them.
#[derive(Debug, Clone)]
pub struct Report {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub data: serde_json::Value,
}

impl Report {
    fn new<T: Serialize>(name: &'static str, columns: &[&'static str], data: &T) -> Result<Self> {
        Ok(Report {
            name,
            columns: columns.to_vec(),
            rows: Vec::new(),
            data: serde_json::to_value(data)?,
        })
    }

    /// CSV body without the header comment.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
    }

    /// Write `<name>.csv` and `<name>.json` into `dir`; returns the CSV path.
    pub fn write(&self, dir: &Path, header: &ReportHeader) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let body = format!("{}\n{}", header.line(), self.to_csv()?);
        std::fs::write(&csv_path, body).map_err(|e| Error::io(&csv_path, e))?;

        let json_path = dir.join(format!("{}.json", self.name));
        let sidecar = serde_json::json!({ "header": header, "data": self.data });
        let mut text = serde_json::to_string_pretty(&sidecar)?;
        text.push('\n');
        std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
        Ok(csv_path)
    }
}

/// Two decimals, without a negative sign on zero.
pub fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn opt2(x: Option<f64>) -> String {
    x.map(fmt2).unwrap_or_default()
}

/// `0.29*** (0.19 - 0.39)`.
pub fn display_term(t: &Term) -> String {
    format!(
        "{}{} ({} - {})",
        fmt2(t.coefficient),
        t.stars(),
        fmt2(t.ci_lower),
        fmt2(t.ci_upper)
    )
}

/// One row per regression term and column. With `democracy_only` just the
/// democracy coefficient is listed.
pub fn regression_table(
    name: &'static str,
    columns: &[TableColumn],
    democracy_only: bool,
) -> Result<Report> {
    let mut r = Report::new(
        name,
        &[
            "outcome",
            "index",
            "term",
            "coefficient",
            "stars",
            "ci_lower",
            "ci_upper",
            "std_error",
            "p_value",
            "display",
            "n_observations",
            "n_clusters",
            "r_squared",
        ],
        &columns,
    )?;
    for c in columns {
        for t in &c.result.terms {
            if democracy_only && t.name != crate::smoothness::terms::DEMOCRACY {
                continue;
            }
            r.rows.push(vec![
                c.outcome.label().into(),
                c.index.label().into(),
                t.name.clone(),
                fmt2(t.coefficient),
                t.stars().into(),
                fmt2(t.ci_lower),
                fmt2(t.ci_upper),
                fmt2(t.std_error),
                fmt2(t.p_value),
                display_term(t),
                c.result.n_observations.to_string(),
                c.result.n_clusters.to_string(),
                fmt2(c.result.r_squared),
            ]);
        }
    }
    Ok(r)
}

/// Digit-test results for one cutoff and outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenfordRun {
    pub cutoff: f64,
    pub outcome: Outcome,
    pub strict: bool,
    pub reports: Vec<BenfordReport>,
}

/// One row per cutoff, outcome and regime: sample size, statistic, p-value.
pub fn benford_table(runs: &[BenfordRun]) -> Result<Report> {
    let mut r = Report::new(
        names::TABLE_S2,
        &[
            "cutoff",
            "outcome",
            "regime",
            "n",
            "chi_square",
            "p_value",
            "stars",
            "rejected_1pct",
        ],
        &runs,
    )?;
    for run in runs {
        for b in &run.reports {
            r.rows.push(vec![
                format!("{}", run.cutoff),
                run.outcome.label().into(),
                b.regime_class.label().into(),
                b.histogram.total().to_string(),
                opt2(b.chi_square),
                opt2(b.p_value),
                b.p_value.map(significance_stars).unwrap_or_default().into(),
                b.rejected.to_string(),
            ]);
        }
    }
    Ok(r)
}

/// Observed and expected digit shares for every run and regime.
pub fn benford_digits(runs: &[BenfordRun]) -> Result<Report> {
    let mut r = Report::new(
        names::FIGURE3,
        &[
            "cutoff",
            "outcome",
            "regime",
            "digit",
            "observed",
            "expected",
            "observed_share",
            "benford_share",
        ],
        &runs,
    )?;
    for run in runs {
        for b in &run.reports {
            let shares = b.histogram.frequencies();
            for (d, ((count, expected), share)) in b
                .histogram
                .counts
                .iter()
                .zip(&b.expected)
                .zip(&shares)
                .enumerate()
            {
                r.rows.push(vec![
                    format!("{}", run.cutoff),
                    run.outcome.label().into(),
                    b.regime_class.label().into(),
                    (d + 1).to_string(),
                    count.to_string(),
                    fmt2(*expected),
                    fmt2(*share),
                    fmt2(crate::benford::benford_expected(d as u8 + 1)),
                ]);
            }
        }
    }
    Ok(r)
}

/// Cumulative burden per country, with the per-regime summary and
/// democracy shares in the sidecar.
pub fn burden_table(summary: &BurdenSummary) -> Result<Report> {
    let mut r = Report::new(
        names::FIGURE1,
        &[
            "country_id",
            "name",
            "regime",
            "population",
            "cases",
            "deaths",
            "cases_per_million",
            "deaths_per_million",
        ],
        summary,
    )?;
    for c in &summary.countries {
        r.rows.push(vec![
            c.country_id.clone(),
            c.name.clone(),
            c.regime_class.label().into(),
            c.population.to_string(),
            c.cases.to_string(),
            c.deaths.to_string(),
            fmt2(c.cases_per_million),
            fmt2(c.deaths_per_million),
        ]);
    }
    Ok(r)
}

pub fn deviation_table(points: &[CountryDeviation]) -> Result<Report> {
    let mut r = Report::new(
        names::FIGURE2,
        &[
            "country_id",
            "name",
            "eiu",
            "regime",
            "log_mean_deviation_cases",
            "log_mean_deviation_deaths",
        ],
        &points,
    )?;
    for p in points {
        r.rows.push(vec![
            p.country_id.clone(),
            p.name.clone(),
            fmt2(p.eiu_score),
            p.regime_class.label().into(),
            fmt2(p.log_mean_deviation_cases),
            fmt2(p.log_mean_deviation_deaths),
        ]);
    }
    Ok(r)
}

/// Cumulative counts per million and case fatality ratio by regime.
pub fn cumulative_series_table(days: &[RegimeDay]) -> Result<Report> {
    let mut r = Report::new(
        names::FIGURE_S1,
        &[
            "regime",
            "date",
            "cum_cases",
            "cum_deaths",
            "cum_cases_per_million",
            "cum_deaths_per_million",
            "cfr",
        ],
        &days,
    )?;
    for d in days {
        r.rows.push(vec![
            d.regime_class.label().into(),
            d.date.to_string(),
            d.cum_cases.to_string(),
            d.cum_deaths.to_string(),
            fmt2(d.cum_cases_per_million),
            fmt2(d.cum_deaths_per_million),
            d.cfr.map(|c| format!("{c:.4}")).unwrap_or_default(),
        ]);
    }
    Ok(r)
}

/// New counts per million and their 7-day averages by regime.
pub fn daily_series_table(days: &[RegimeDay]) -> Result<Report> {
    let mut r = Report::new(
        names::FIGURE_S2,
        &[
            "regime",
            "date",
            "new_cases",
            "new_deaths",
            "new_cases_per_million",
            "new_deaths_per_million",
            "ma_cases_per_million",
            "ma_deaths_per_million",
        ],
        &days,
    )?;
    for d in days {
        r.rows.push(vec![
            d.regime_class.label().into(),
            d.date.to_string(),
            d.new_cases.to_string(),
            d.new_deaths.to_string(),
            fmt2(d.new_cases_per_million),
            fmt2(d.new_deaths_per_million),
            opt2(d.ma_cases_per_million),
            opt2(d.ma_deaths_per_million),
        ]);
    }
    Ok(r)
}

pub fn power_table(rows: &[PowerRow]) -> Result<Report> {
    let mut r = Report::new(
        names::POWER,
        &[
            "detector",
            "smoothing_weight",
            "replications",
            "flagged",
            "power",
        ],
        &rows,
    )?;
    for p in rows {
        r.rows.push(vec![
            p.detector.label().into(),
            format!("{}", p.smoothing_weight),
            p.replications.to_string(),
            p.flagged.to_string(),
            format!("{:.3}", p.power),
        ]);
    }
    Ok(r)
}

/// Column label used in printed summaries, e.g. `deaths/eiu`.
pub fn column_label(outcome: Outcome, index: IndexSource) -> String {
    format!("{}/{}", outcome.label(), index.label())
}
