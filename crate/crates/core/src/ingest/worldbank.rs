//! World Bank covariates and regional-mean imputation.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// World Bank regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    EastAsiaPacific,
    EuropeCentralAsia,
    LatinAmericaCaribbean,
    MiddleEastNorthAfrica,
    NorthAmerica,
    SouthAsia,
    SubSaharanAfrica,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::EastAsiaPacific,
        Region::EuropeCentralAsia,
        Region::LatinAmericaCaribbean,
        Region::MiddleEastNorthAfrica,
        Region::NorthAmerica,
        Region::SouthAsia,
        Region::SubSaharanAfrica,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Region::EastAsiaPacific => "East Asia & Pacific",
            Region::EuropeCentralAsia => "Europe & Central Asia",
            Region::LatinAmericaCaribbean => "Latin America & Caribbean",
            Region::MiddleEastNorthAfrica => "Middle East & North Africa",
            Region::NorthAmerica => "North America",
            Region::SouthAsia => "South Asia",
            Region::SubSaharanAfrica => "Sub-Saharan Africa",
        }
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        Region::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(t))
            .ok_or_else(|| Error::UnknownRegion(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImputedFlags {
    pub gdp_per_capita: bool,
    pub trade_pct_gdp: bool,
    pub health_pct_gdp: bool,
    pub share_65plus: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateRecord {
    pub country_id: String,
    pub region: Region,
    pub population: Option<u64>,
    /// Current US dollars per person.
    pub gdp_per_capita: Option<f64>,
    /// Exports plus imports, percent of GDP; may exceed 100.
    pub trade_pct_gdp: Option<f64>,
    /// Current health expenditure, percent of GDP.
    pub health_pct_gdp: Option<f64>,
    /// Population aged 65 and above, percent of total.
    pub share_65plus: Option<f64>,
    pub imputed_flags: ImputedFlags,
}

type Field = (
    &'static str,
    fn(&CovariateRecord) -> Option<f64>,
    fn(&mut CovariateRecord, f64),
);

const FIELDS: [Field; 4] = [
    (
        "gdp_per_capita",
        |r| r.gdp_per_capita,
        |r, v| {
            r.gdp_per_capita = Some(v);
            r.imputed_flags.gdp_per_capita = true;
        },
    ),
    (
        "trade_pct_gdp",
        |r| r.trade_pct_gdp,
        |r, v| {
            r.trade_pct_gdp = Some(v);
            r.imputed_flags.trade_pct_gdp = true;
        },
    ),
    (
        "health_pct_gdp",
        |r| r.health_pct_gdp,
        |r, v| {
            r.health_pct_gdp = Some(v);
            r.imputed_flags.health_pct_gdp = true;
        },
    ),
    (
        "share_65plus",
        |r| r.share_65plus,
        |r, v| {
            r.share_65plus = Some(v);
            r.imputed_flags.share_65plus = true;
        },
    ),
];

/// Read the covariate table.
///
/// Header: `country,region,population,gdp_per_capita,trade_pct_gdp,
/// health_pct_gdp,share_65plus`. Empty cells stay missing.
pub fn parse_worldbank<R: Read>(reader: R, file: &str) -> Result<Vec<CovariateRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Format {
                file: file.to_string(),
                reason: format!("missing column {name:?}"),
            })
    };
    let c_country = col("country")?;
    let c_region = col("region")?;
    let c_pop = col("population")?;
    let cols = [
        col("gdp_per_capita")?,
        col("trade_pct_gdp")?,
        col("health_pct_gdp")?,
        col("share_65plus")?,
    ];

    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |c: usize| Error::BadCell {
            file: file.to_string(),
            row,
            column: headers.get(c).unwrap_or("").to_string(),
            value: rec.get(c).unwrap_or("").to_string(),
        };
        let num = |c: usize| -> Result<Option<f64>> {
            match rec.get(c).unwrap_or("") {
                "" | ".." => Ok(None),
                v => v
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite() && *x >= 0.0)
                    .map(Some)
                    .ok_or_else(|| bad(c)),
            }
        };
        let population = match num(c_pop)? {
            Some(p) if p >= 1.0 => Some(p.round() as u64),
            Some(_) => return Err(bad(c_pop)),
            None => None,
        };
        let rec_out = CovariateRecord {
            country_id: rec.get(c_country).unwrap_or("").to_string(),
            region: rec.get(c_region).unwrap_or("").parse()?,
            population,
            gdp_per_capita: num(cols[0])?,
            trade_pct_gdp: num(cols[1])?,
            health_pct_gdp: num(cols[2])?,
            share_65plus: num(cols[3])?,
            imputed_flags: ImputedFlags::default(),
        };
        for (k, name) in [(2usize, "health_pct_gdp"), (3, "share_65plus")] {
            if let Some(v) = (FIELDS[k].1)(&rec_out) {
                if v > 100.0 {
                    return Err(Error::BadCell {
                        file: file.to_string(),
                        row,
                        column: name.into(),
                        value: v.to_string(),
                    });
                }
            }
        }
        out.push(rec_out);
    }
    Ok(out)
}

/// Replace each missing covariate by the mean of the reported values of
/// that covariate among countries in the same region.
pub fn impute_regional_averages(mut records: Vec<CovariateRecord>) -> Result<Vec<CovariateRecord>> {
    for (name, get, set) in FIELDS {
        let mut donors: BTreeMap<Region, (f64, usize)> = BTreeMap::new();
        for r in &records {
            if let Some(v) = get(r) {
                let e = donors.entry(r.region).or_insert((0.0, 0));
                e.0 += v;
                e.1 += 1;
            }
        }
        for r in records.iter_mut().filter(|r| get(r).is_none()) {
            match donors.get(&r.region) {
                Some(&(sum, n)) if n > 0 => set(r, sum / n as f64),
                _ => {
                    return Err(Error::NoDonors {
                        region: r.region.label().to_string(),
                        field: name,
                    })
                }
            }
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HEADER: &str =
        "country,region,population,gdp_per_capita,trade_pct_gdp,health_pct_gdp,share_65plus";

    fn rec(id: &str, region: Region, gdp: Option<f64>) -> CovariateRecord {
        CovariateRecord {
            country_id: id.into(),
            region,
            population: Some(1_000_000),
            gdp_per_capita: gdp,
            trade_pct_gdp: Some(50.0),
            health_pct_gdp: Some(5.0),
            share_65plus: Some(10.0),
            imputed_flags: ImputedFlags::default(),
        }
    }

    #[test]
    fn parses_a_row() {
        let f = format!("{HEADER}\nNorway,Europe & Central Asia,5314336,81697,71.2,10.1,17.0\n");
        let r = parse_worldbank(f.as_bytes(), "wb.csv").unwrap();
        assert_eq!(r[0].region, Region::EuropeCentralAsia);
        assert_eq!(r[0].population, Some(5_314_336));
        assert_eq!(r[0].gdp_per_capita, Some(81697.0));
    }

    #[test]
    fn missing_cell_stays_missing() {
        let f = format!("{HEADER}\nSomalia,Sub-Saharan Africa,15008154,,,,2.9\n");
        let r = parse_worldbank(f.as_bytes(), "wb.csv").unwrap();
        assert_eq!(r[0].gdp_per_capita, None);
        assert_eq!(r[0].health_pct_gdp, None);
        assert_eq!(r[0].share_65plus, Some(2.9));
    }

    #[test]
    fn unknown_region_is_rejected() {
        let f = format!("{HEADER}\nX,Atlantis,1,1,1,1,1\n");
        assert!(
            matches!(parse_worldbank(f.as_bytes(), "wb.csv"), Err(Error::UnknownRegion(r)) if r == "Atlantis")
        );
    }

    #[test]
    fn imputes_regional_mean() {
        let r = Region::SouthAsia;
        let out = impute_regional_averages(vec![
            rec("a", r, Some(10.0)),
            rec("b", r, None),
            rec("c", r, Some(20.0)),
            rec("d", Region::NorthAmerica, Some(99.0)),
        ])
        .unwrap();
        assert_eq!(out[1].gdp_per_capita, Some(15.0));
        assert!(out[1].imputed_flags.gdp_per_capita);
        assert!(!out[0].imputed_flags.gdp_per_capita);
        assert!(!out[1].imputed_flags.trade_pct_gdp);
    }

    #[test]
    fn nothing_missing_is_identity() {
        let input = vec![
            rec("a", Region::SouthAsia, Some(1.0)),
            rec("b", Region::NorthAmerica, Some(2.0)),
        ];
        assert_eq!(impute_regional_averages(input.clone()).unwrap(), input);
    }

    #[test]
    fn region_without_donors_is_an_error() {
        let err = impute_regional_averages(vec![
            rec("a", Region::SouthAsia, None),
            rec("b", Region::NorthAmerica, Some(2.0)),
        ])
        .unwrap_err();
        assert!(
            matches!(err, Error::NoDonors { field: "gdp_per_capita", ref region } if region == "South Asia")
        );
    }

    proptest! {
        #[test]
        fn imputation_preserves_donors_and_mean(
            vals in prop::collection::vec(prop::option::weighted(0.7, 1.0f64..1e5), 2..30)
        ) {
            prop_assume!(vals.iter().any(Option::is_some));
            let input: Vec<_> = vals.iter().enumerate()
                .map(|(i, v)| rec(&i.to_string(), Region::SubSaharanAfrica, *v))
                .collect();
            let out = impute_regional_averages(input.clone()).unwrap();
            let donors: Vec<f64> = vals.iter().flatten().copied().collect();
            let donor_mean = donors.iter().sum::<f64>() / donors.len() as f64;
            for (a, b) in input.iter().zip(&out) {
                if let Some(v) = a.gdp_per_capita {
                    prop_assert_eq!(b.gdp_per_capita, Some(v));
                    prop_assert!(!b.imputed_flags.gdp_per_capita);
                } else {
                    prop_assert!(b.imputed_flags.gdp_per_capita);
                }
            }
            let all_mean = out.iter().map(|r| r.gdp_per_capita.unwrap()).sum::<f64>() / out.len() as f64;
            prop_assert!((all_mean - donor_mean).abs() < 1e-9 * donor_mean);
        }
    }
}
