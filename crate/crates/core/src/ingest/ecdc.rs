//! ECDC daily-report file (long: one row per country and day, new counts).
//!
//! Accepts the published column names (`dateRep`, `cases`, `deaths`,
//! `countriesAndTerritories`) or the plain `date`, `new_cases`, `new_deaths`,
//! `country`. Dates may be `dd/mm/yyyy` or ISO.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;

use super::CountrySeries;
use crate::error::{Error, Result};

fn find(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%d/%m/%Y")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d"))
        .ok()
}

/// Accumulate daily new counts into cumulative series. Days missing between
/// a country's first and last row count as zero new cases and deaths.
pub fn parse_ecdc<R: Read>(reader: R, file: &str) -> Result<Vec<CountrySeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().all(|h| h.is_empty()) {
        return Ok(Vec::new());
    }
    let col = |names: &[&str]| {
        find(&headers, names).ok_or_else(|| Error::Format {
            file: file.to_string(),
            reason: format!("missing column {:?}", names[0]),
        })
    };
    let c_country = col(&["countriesAndTerritories", "country"])?;
    let c_date = col(&["dateRep", "date"])?;
    let c_cases = col(&["cases", "new_cases"])?;
    let c_deaths = col(&["deaths", "new_deaths"])?;

    // country -> date -> (cases, deaths), keeping the source's own label.
    let mut rows: BTreeMap<String, BTreeMap<NaiveDate, (i64, i64)>> = BTreeMap::new();
    let mut merged: BTreeMap<String, BTreeMap<NaiveDate, (i64, i64)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let bad = |c: usize, name: &str| Error::BadCell {
            file: file.to_string(),
            row,
            column: name.to_string(),
            value: cell(c).to_string(),
        };
        let country = cell(c_country).to_string();
        let date = parse_date(cell(c_date)).ok_or_else(|| bad(c_date, "date"))?;
        let cases = parse_count(cell(c_cases)).ok_or_else(|| bad(c_cases, "cases"))?;
        let deaths = parse_count(cell(c_deaths)).ok_or_else(|| bad(c_deaths, "deaths"))?;
        if rows
            .entry(country.clone())
            .or_default()
            .insert(date, (cases, deaths))
            .is_some()
        {
            return Err(Error::DuplicateRow { country, date });
        }
        let target = if super::normalize_name(&country) == "hong kong" {
            "China".to_string()
        } else {
            country
        };
        let slot = merged
            .entry(target)
            .or_default()
            .entry(date)
            .or_insert((0, 0));
        slot.0 += cases;
        slot.1 += deaths;
    }

    let mut out = Vec::with_capacity(merged.len());
    for (country, days) in merged {
        let (first, last) = match (days.keys().next(), days.keys().next_back()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => continue,
        };
        let (mut cc, mut cd) = (0i64, 0i64);
        let mut series = CountrySeries {
            country_id: country.clone(),
            name: country.replace('_', " "),
            population: None,
            latitude: None,
            dates: Vec::new(),
            cum_cases: Vec::new(),
            cum_deaths: Vec::new(),
        };
        for date in first.iter_days().take_while(|d| *d <= last) {
            let (c, d) = days.get(&date).copied().unwrap_or((0, 0));
            cc += c;
            cd += d;
            if cc < 0 || cd < 0 {
                return Err(Error::Format {
                    file: file.to_string(),
                    reason: format!("cumulative count for {country} turns negative on {date}"),
                });
            }
            series.dates.push(date);
            series.cum_cases.push(cc as u64);
            series.cum_deaths.push(cd as u64);
        }
        out.push(series);
    }
    Ok(out)
}

fn parse_count(s: &str) -> Option<i64> {
    if s.is_empty() {
        return Some(0);
    }
    s.parse::<i64>().ok().or_else(|| {
        s.parse::<f64>()
            .ok()
            .filter(|f| f.fract() == 0.0)
            .map(|f| f as i64)
    })
}
