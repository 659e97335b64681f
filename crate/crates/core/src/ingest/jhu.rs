//! JHU CSSE global time-series files (wide: one column per date).

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;

use super::CountrySeries;
use crate::error::{Error, Result};

const CONFIRMED: &str = "confirmed";
const DEATHS: &str = "deaths";

struct WideFile {
    dates: Vec<NaiveDate>,
    /// Country -> (summed counts, latitude of the row without a province,
    /// latitudes of province rows).
    countries: BTreeMap<String, Accum>,
}

#[derive(Default)]
struct Accum {
    counts: Vec<u64>,
    main_lat: Option<f64>,
    province_lats: Vec<f64>,
}

impl Accum {
    fn latitude(&self) -> Option<f64> {
        self.main_lat.or_else(|| {
            (!self.province_lats.is_empty())
                .then(|| self.province_lats.iter().sum::<f64>() / self.province_lats.len() as f64)
        })
    }
}

fn parse_header_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%m/%d/%y")
        .or_else(|_| NaiveDate::parse_from_str(s, "%Y-%m-%d"))
        .ok()
}

/// Hong Kong is counted as part of China.
fn country_of(country: &str) -> &str {
    if super::normalize_name(country) == "hong kong" {
        "China"
    } else {
        country
    }
}

fn read_wide<R: Read>(reader: R, file: &'static str) -> Result<WideFile> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["Province/State", "Country/Region", "Lat", "Long"];
    if headers.len() < 4 || !headers.iter().zip(expected).all(|(h, e)| h.trim() == e) {
        return Err(Error::Format {
            file: file.into(),
            reason: format!("header must start with {}", expected.join(",")),
        });
    }
    let dates = headers
        .iter()
        .skip(4)
        .map(|h| {
            parse_header_date(h.trim()).ok_or_else(|| Error::Format {
                file: file.into(),
                reason: format!("column header {h:?} is not a date"),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut countries: BTreeMap<String, Accum> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let province = rec.get(0).unwrap_or("").trim();
        let raw_country = rec.get(1).unwrap_or("").trim();
        let country = country_of(raw_country).to_string();
        let lat = rec.get(2).and_then(|v| v.trim().parse::<f64>().ok());

        let acc = countries.entry(country).or_default();
        if acc.counts.is_empty() {
            acc.counts = vec![0; dates.len()];
        }
        if let Some(lat) = lat {
            if province.is_empty() && raw_country == country_of(raw_country) {
                acc.main_lat = Some(lat);
            } else {
                acc.province_lats.push(lat);
            }
        }
        for (j, cell) in rec.iter().skip(4).enumerate() {
            let cell = cell.trim();
            let v = cell
                .parse::<u64>()
                .or_else(|e| match cell.parse::<f64>() {
                    Ok(f) if f >= 0.0 && f.fract() == 0.0 => Ok(f as u64),
                    _ => Err(e),
                })
                .map_err(|_| Error::BadCell {
                    file: file.into(),
                    row,
                    column: headers.get(j + 4).unwrap_or("").to_string(),
                    value: cell.to_string(),
                })?;
            acc.counts[j] += v;
        }
    }
    Ok(WideFile { dates, countries })
}

/// Parse the confirmed-cases and deaths files into one series per country.
///
/// Province rows are summed, and Hong Kong is folded into China. The two
/// files must carry the same dates, and the dates must be consecutive days.
pub fn parse_jhu<R1: Read, R2: Read>(confirmed: R1, deaths: R2) -> Result<Vec<CountrySeries>> {
    let cases = read_wide(confirmed, CONFIRMED)?;
    let deaths = read_wide(deaths, DEATHS)?;

    if let Some(d) = cases.dates.iter().find(|d| !deaths.dates.contains(d)) {
        return Err(Error::DateMismatch {
            date: d.to_string(),
            present_in: CONFIRMED,
            missing_from: DEATHS,
        });
    }
    if let Some(d) = deaths.dates.iter().find(|d| !cases.dates.contains(d)) {
        return Err(Error::DateMismatch {
            date: d.to_string(),
            present_in: DEATHS,
            missing_from: CONFIRMED,
        });
    }

    let mut order: Vec<usize> = (0..cases.dates.len()).collect();
    order.sort_by_key(|&i| cases.dates[i]);
    let death_pos: Vec<usize> = order
        .iter()
        .map(|&i| {
            deaths
                .dates
                .iter()
                .position(|d| *d == cases.dates[i])
                .expect("checked")
        })
        .collect();
    let dates: Vec<NaiveDate> = order.iter().map(|&i| cases.dates[i]).collect();

    let mut out = Vec::with_capacity(cases.countries.len());
    for (name, acc) in &cases.countries {
        let d = deaths.countries.get(name).ok_or_else(|| Error::Format {
            file: DEATHS.into(),
            reason: format!("no rows for {name:?}, which appears in the {CONFIRMED} file"),
        })?;
        let series = CountrySeries {
            country_id: name.clone(),
            name: name.clone(),
            population: None,
            latitude: acc.latitude(),
            dates: dates.clone(),
            cum_cases: order.iter().map(|&i| acc.counts[i]).collect(),
            cum_deaths: death_pos.iter().map(|&i| d.counts[i]).collect(),
        };
        series.validate()?;
        out.push(series);
    }
    if let Some(name) = deaths
        .countries
        .keys()
        .find(|k| !cases.countries.contains_key(*k))
    {
        return Err(Error::Format {
            file: CONFIRMED.into(),
            reason: format!("no rows for {name:?}, which appears in the {DEATHS} file"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Province/State,Country/Region,Lat,Long,3/1/20,3/2/20";

    #[test]
    fn provinces_are_summed() {
        let cases = format!("{HEADER}\nA,Xland,10,0,1,2\nB,Xland,20,0,0,3\n");
        let deaths = format!("{HEADER}\nA,Xland,10,0,0,0\nB,Xland,20,0,0,1\n");
        let s = parse_jhu(cases.as_bytes(), deaths.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].cum_cases, vec![1, 5]);
        assert_eq!(s[0].cum_deaths, vec![0, 1]);
        assert_eq!(s[0].latitude, Some(15.0));
        assert_eq!(s[0].dates[0], NaiveDate::from_ymd_opt(2020, 3, 1).unwrap());
    }

    #[test]
    fn hong_kong_merges_into_china() {
        let cases = format!(
            "{HEADER}\nHubei,China,30.9,112.2,10,20\n,Hong Kong,22.3,114.1,1,2\nHong Kong,China,22.3,114.1,3,4\n"
        );
        let deaths = format!(
            "{HEADER}\nHubei,China,30.9,112.2,1,1\n,Hong Kong,22.3,114.1,0,0\nHong Kong,China,22.3,114.1,0,1\n"
        );
        let s = parse_jhu(cases.as_bytes(), deaths.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].name, "China");
        assert_eq!(s[0].cum_cases, vec![14, 26]);
        assert_eq!(s[0].cum_deaths, vec![1, 2]);
    }

    #[test]
    fn main_row_latitude_wins() {
        let cases = format!("{HEADER}\n,France,46.2,2.2,1,1\nReunion,France,-21.1,55.5,0,0\n");
        let s = parse_jhu(cases.as_bytes(), cases.as_bytes()).unwrap();
        assert_eq!(s[0].latitude, Some(46.2));
    }

    #[test]
    fn date_missing_from_deaths_is_named() {
        let cases = "Province/State,Country/Region,Lat,Long,3/1/20,3/2/20,3/3/20\n,X,0,0,1,2,3\n";
        let deaths = format!("{HEADER}\n,X,0,0,0,0\n");
        let err = parse_jhu(cases.as_bytes(), deaths.as_bytes()).unwrap_err();
        assert!(matches!(&err, Error::DateMismatch { date, .. } if date == "2020-03-03"));
        assert!(err.to_string().contains("2020-03-03"));
    }

    #[test]
    fn bad_cell_reports_row_and_column() {
        let cases = format!("{HEADER}\n,X,0,0,1,two\n");
        let deaths = format!("{HEADER}\n,X,0,0,0,0\n");
        match parse_jhu(cases.as_bytes(), deaths.as_bytes()) {
            Err(Error::BadCell {
                row, column, value, ..
            }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "3/2/20", "two"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gap_in_dates_is_rejected() {
        let h = "Province/State,Country/Region,Lat,Long,3/1/20,3/3/20";
        let f = format!("{h}\n,X,0,0,1,2\n");
        assert!(matches!(
            parse_jhu(f.as_bytes(), f.as_bytes()),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let f = "Country,Lat,Long,3/1/20\nX,0,0,1\n";
        assert!(matches!(
            parse_jhu(f.as_bytes(), f.as_bytes()),
            Err(Error::Format { .. })
        ));
    }
}
