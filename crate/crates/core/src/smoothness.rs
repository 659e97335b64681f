//! The smoothness test and the descriptive burden statistics.
//!
//! Each country-day from the first reported case onward whose 7-day window
//! is complete becomes one panel row. Its outcome is
//! `ln(((obs - ma)^2 + 1) / population_millions)` for cases and for deaths.
//! Regressing that outcome on a democracy score with country-clustered
//! errors asks whether less democratic countries report data that hugs its
//! own moving average more tightly.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CovariateRecord, JoinedCountry, JoinedDataset};
use crate::regimes::{IndexSource, RegimeClass};
use crate::regression::{fit_clustered, DesignMatrix, RegressionResult};
use crate::timeseries::{
    centered_ma7, country_mean_log_deviation, daily_from_cumulative, moving_average,
    smoothness_depvar,
};
use crate::Outcome;

/// Latitude (degrees north) at and above which the latitude indicator is 1.
pub const NORTHERN_LATITUDE: f64 = 40.0;

/// Regressor names as they appear in reports.
pub mod terms {
    pub const DEMOCRACY: &str = "Democracy";
    pub const GDP: &str = "Per capita GDP";
    pub const TRADE: &str = "Trade as % of GDP";
    pub const HEALTH: &str = "Health as % of GDP";
    pub const ELDERLY: &str = "Share of >=65 years in pop";
    pub const LATITUDE: &str = "Country >=40N latitude";
}

/// How the World Bank controls enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CovariateTransform {
    /// Natural logarithm of GDP per capita, trade share, health share and
    /// elderly share.
    Log,
    Raw,
}

impl CovariateTransform {
    fn apply(self, v: f64) -> f64 {
        match self {
            CovariateTransform::Log => v.ln(),
            CovariateTransform::Raw => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRow {
    pub country_id: String,
    pub date: NaiveDate,
    pub depvar_cases: f64,
    pub depvar_deaths: f64,
    /// Normalized 0–10 scores in [`IndexSource::ALL`] order.
    pub scores: [Option<f64>; 4],
    pub gdp_per_capita: Option<f64>,
    pub trade_pct_gdp: Option<f64>,
    pub health_pct_gdp: Option<f64>,
    pub share_65plus: Option<f64>,
    pub lat40: Option<bool>,
}

impl PanelRow {
    pub fn depvar(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Cases => self.depvar_cases,
            Outcome::Deaths => self.depvar_deaths,
        }
    }

    pub fn score(&self, source: IndexSource) -> Option<f64> {
        let i = IndexSource::ALL
            .iter()
            .position(|s| *s == source)
            .expect("listed");
        self.scores[i]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelExclusion {
    pub country_id: String,
    pub reason: String,
}

/// Country-day rows for the smoothness regressions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeviationPanel {
    /// Ordered by country key, then date.
    pub rows: Vec<PanelRow>,
    pub excluded: Vec<PanelExclusion>,
}

impl DeviationPanel {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn country_rows(c: &JoinedCountry) -> std::result::Result<Vec<PanelRow>, String> {
    let s = &c.series;
    let pop = s
        .pop_millions()
        .ok_or_else(|| "no population".to_string())?;
    let Some(first) = s.first_case_index() else {
        return Ok(Vec::new());
    };
    let as_f64 = |v: &[u64]| -> Vec<f64> {
        daily_from_cumulative(v)
            .into_iter()
            .map(|x| x as f64)
            .collect()
    };
    let cases = as_f64(&s.cum_cases);
    let deaths = as_f64(&s.cum_deaths);
    let cov: &CovariateRecord = &c.covariates;
    let scores = IndexSource::ALL.map(|src| c.regime.normalized(src));
    let lat40 = s.latitude.map(|l| l >= NORTHERN_LATITUDE);

    Ok((first..s.len())
        .filter_map(|t| {
            let mc = centered_ma7(&cases, t)?;
            let md = centered_ma7(&deaths, t)?;
            Some(PanelRow {
                country_id: s.country_id.clone(),
                date: s.dates[t],
                depvar_cases: smoothness_depvar(cases[t], mc, pop),
                depvar_deaths: smoothness_depvar(deaths[t], md, pop),
                scores,
                gdp_per_capita: cov.gdp_per_capita,
                trade_pct_gdp: cov.trade_pct_gdp,
                health_pct_gdp: cov.health_pct_gdp,
                share_65plus: cov.share_65plus,
                lat40,
            })
        })
        .collect())
}

/// Build the country-day panel. Countries without a population are left
/// out and listed in `excluded`.
pub fn build_panel(data: &JoinedDataset) -> DeviationPanel {
    let per_country: Vec<_> = data
        .countries
        .par_iter()
        .map(|c| (c.country_id().to_string(), country_rows(c)))
        .collect();
    let mut panel = DeviationPanel::default();
    for (id, res) in per_country {
        match res {
            Ok(rows) => panel.rows.extend(rows),
            Err(reason) => panel.excluded.push(PanelExclusion {
                country_id: id,
                reason,
            }),
        }
    }
    panel
}

/// Which regression to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Test1Spec {
    pub index: IndexSource,
    pub outcome: Outcome,
    pub with_controls: bool,
    pub transform: CovariateTransform,
}

/// Regress the outcome on the normalized democracy score (plus controls when
/// requested), clustering by country. Rows missing any regressor are
/// skipped.
pub fn run_test1(panel: &DeviationPanel, spec: Test1Spec) -> Result<RegressionResult> {
    let tr = |v: Option<f64>| v.map(|v| spec.transform.apply(v));
    let mut y = Vec::new();
    let mut keys: Vec<&str> = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); if spec.with_controls { 6 } else { 1 }];

    for row in &panel.rows {
        let Some(score) = row.score(spec.index) else {
            continue;
        };
        let mut values = vec![score];
        if spec.with_controls {
            let controls = [
                tr(row.gdp_per_capita),
                tr(row.trade_pct_gdp),
                tr(row.health_pct_gdp),
                tr(row.share_65plus),
                row.lat40.map(|b| if b { 1.0 } else { 0.0 }),
            ];
            if controls.iter().any(|c| !c.is_some_and(f64::is_finite)) {
                continue;
            }
            values.extend(controls.iter().map(|c| c.expect("checked")));
        }
        for (col, v) in cols.iter_mut().zip(values) {
            col.push(v);
        }
        y.push(row.depvar(spec.outcome));
        keys.push(&row.country_id);
    }

    let mut names = vec![terms::DEMOCRACY];
    if spec.with_controls {
        names.extend([
            terms::GDP,
            terms::TRADE,
            terms::HEALTH,
            terms::ELDERLY,
            terms::LATITUDE,
        ]);
    }
    let regressors = names.into_iter().map(String::from).zip(cols).collect();
    let design = DesignMatrix::with_intercept(y, regressors, &keys)?;
    fit_clustered(&design)
}

/// One column of a regression table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableColumn {
    pub outcome: Outcome,
    pub index: IndexSource,
    pub result: RegressionResult,
}

/// All eight regressions (two outcomes by four indices), fitted in parallel.
pub fn run_table(
    panel: &DeviationPanel,
    with_controls: bool,
    transform: CovariateTransform,
) -> Result<Vec<TableColumn>> {
    let jobs: Vec<(Outcome, IndexSource)> = Outcome::ALL
        .iter()
        .flat_map(|&o| IndexSource::ALL.iter().map(move |&i| (o, i)))
        .collect();
    jobs.par_iter()
        .map(|&(outcome, index)| {
            let result = run_test1(
                panel,
                Test1Spec {
                    index,
                    outcome,
                    with_controls,
                    transform,
                },
            )?;
            Ok(TableColumn {
                outcome,
                index,
                result,
            })
        })
        .collect()
}

/// Median, hinges and mean of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub n: usize,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub mean: f64,
}

/// Linear-interpolation quantile (R type 7) of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Distribution {
            n: v.len(),
            median: quantile_sorted(&v, 0.5),
            q25: quantile_sorted(&v, 0.25),
            q75: quantile_sorted(&v, 0.75),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime_class: RegimeClass,
    pub n_countries: usize,
    pub cases_per_million: Option<Distribution>,
    pub deaths_per_million: Option<Distribution>,
}

/// Shares of the joined world held by flawed and full democracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemocracyShares {
    pub population: f64,
    pub cases: f64,
    pub deaths: f64,
}

/// Cumulative burden of one country on the last observed date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryBurden {
    pub country_id: String,
    pub name: String,
    pub regime_class: RegimeClass,
    pub population: u64,
    pub cases: u64,
    pub deaths: u64,
    pub cases_per_million: f64,
    pub deaths_per_million: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurdenSummary {
    pub countries: Vec<CountryBurden>,
    pub regimes: Vec<RegimeSummary>,
    pub democracy_shares: DemocracyShares,
}

/// Per-regime distribution of cumulative cases and deaths per million at
/// the end of each country's series, and the democracies' shares.
pub fn summary_by_regime(data: &JoinedDataset) -> BurdenSummary {
    let countries: Vec<CountryBurden> = data
        .countries
        .iter()
        .filter_map(|c| {
            let s = &c.series;
            let pop = s.population.filter(|p| *p > 0)?;
            let cases = *s.cum_cases.last()?;
            let deaths = *s.cum_deaths.last()?;
            let m = pop as f64 / 1e6;
            Some(CountryBurden {
                country_id: s.country_id.clone(),
                name: s.name.clone(),
                regime_class: c.regime.regime_class,
                population: pop,
                cases,
                deaths,
                cases_per_million: cases as f64 / m,
                deaths_per_million: deaths as f64 / m,
            })
        })
        .collect();

    let regimes = RegimeClass::ALL
        .iter()
        .map(|&class| {
            let members: Vec<&CountryBurden> = countries
                .iter()
                .filter(|c| c.regime_class == class)
                .collect();
            let cpm: Vec<f64> = members.iter().map(|c| c.cases_per_million).collect();
            let dpm: Vec<f64> = members.iter().map(|c| c.deaths_per_million).collect();
            RegimeSummary {
                regime_class: class,
                n_countries: members.len(),
                cases_per_million: Distribution::of(&cpm),
                deaths_per_million: Distribution::of(&dpm),
            }
        })
        .collect();

    let share = |f: &dyn Fn(&CountryBurden) -> f64| {
        let total: f64 = countries.iter().map(f).sum();
        let dem: f64 = countries
            .iter()
            .filter(|c| c.regime_class.is_democracy())
            .map(f)
            .sum();
        if total > 0.0 {
            dem / total
        } else {
            0.0
        }
    };
    let democracy_shares = DemocracyShares {
        population: share(&|c| c.population as f64),
        cases: share(&|c| c.cases as f64),
        deaths: share(&|c| c.deaths as f64),
    };
    BurdenSummary {
        countries,
        regimes,
        democracy_shares,
    }
}

/// One day of a regime's pooled series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeDay {
    pub regime_class: RegimeClass,
    pub date: NaiveDate,
    pub new_cases: i64,
    pub new_deaths: i64,
    pub new_cases_per_million: f64,
    pub new_deaths_per_million: f64,
    pub ma_cases_per_million: Option<f64>,
    pub ma_deaths_per_million: Option<f64>,
    pub cum_cases: u64,
    pub cum_deaths: u64,
    pub cum_cases_per_million: f64,
    pub cum_deaths_per_million: f64,
    /// Cumulative deaths over cumulative cases; `None` before the first case.
    pub cfr: Option<f64>,
}

/// Daily series summed over the countries of each regime class on a common
/// calendar. Before a country's first date it contributes zero; after its
/// last date it holds its final cumulative count.
pub fn regime_aggregate_series(data: &JoinedDataset) -> Vec<RegimeDay> {
    let calendar: Vec<NaiveDate> = {
        let (mut lo, mut hi) = (None::<NaiveDate>, None::<NaiveDate>);
        for c in &data.countries {
            if let (Some(f), Some(l)) = (c.series.dates.first(), c.series.dates.last()) {
                lo = Some(lo.map_or(*f, |x| x.min(*f)));
                hi = Some(hi.map_or(*l, |x| x.max(*l)));
            }
        }
        match (lo, hi) {
            (Some(lo), Some(hi)) => lo.iter_days().take_while(|d| *d <= hi).collect(),
            _ => return Vec::new(),
        }
    };
    let start = calendar[0];

    let mut out = Vec::new();
    for class in RegimeClass::ALL {
        let members: Vec<&JoinedCountry> = data
            .countries
            .iter()
            .filter(|c| c.regime.regime_class == class && c.series.population.is_some())
            .collect();
        if members.is_empty() {
            continue;
        }
        let pop_m = members
            .iter()
            .map(|c| c.series.population.unwrap_or(0) as f64)
            .sum::<f64>()
            / 1e6;
        let mut cum_c = vec![0u64; calendar.len()];
        let mut cum_d = vec![0u64; calendar.len()];
        for c in &members {
            let s = &c.series;
            let Some(&first) = s.dates.first() else {
                continue;
            };
            let offset = (first - start).num_days() as usize;
            for (i, slot) in cum_c.iter_mut().enumerate().skip(offset) {
                let k = (i - offset).min(s.len() - 1);
                *slot += s.cum_cases[k];
            }
            for (i, slot) in cum_d.iter_mut().enumerate().skip(offset) {
                let k = (i - offset).min(s.len() - 1);
                *slot += s.cum_deaths[k];
            }
        }
        let new_c = daily_from_cumulative(&cum_c);
        let new_d = daily_from_cumulative(&cum_d);
        let pm = |v: &[i64]| -> Vec<f64> { v.iter().map(|&x| x as f64 / pop_m).collect() };
        let (pc, pd) = (pm(&new_c), pm(&new_d));
        let (mc, md) = (moving_average(&pc), moving_average(&pd));
        for (i, &date) in calendar.iter().enumerate() {
            out.push(RegimeDay {
                regime_class: class,
                date,
                new_cases: new_c[i],
                new_deaths: new_d[i],
                new_cases_per_million: pc[i],
                new_deaths_per_million: pd[i],
                ma_cases_per_million: mc[i],
                ma_deaths_per_million: md[i],
                cum_cases: cum_c[i],
                cum_deaths: cum_d[i],
                cum_cases_per_million: cum_c[i] as f64 / pop_m,
                cum_deaths_per_million: cum_d[i] as f64 / pop_m,
                cfr: (cum_c[i] > 0).then(|| cum_d[i] as f64 / cum_c[i] as f64),
            });
        }
    }
    out
}

/// Country-level points of the deviation-versus-democracy scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryDeviation {
    pub country_id: String,
    pub name: String,
    pub eiu_score: f64,
    pub regime_class: RegimeClass,
    pub log_mean_deviation_cases: f64,
    pub log_mean_deviation_deaths: f64,
}

/// Log of the mean per-million squared deviation, over the same days that
/// enter the panel. Countries without such days are left out.
pub fn country_deviations(data: &JoinedDataset) -> Vec<CountryDeviation> {
    data.countries
        .iter()
        .filter_map(|c| {
            let s = &c.series;
            let pop = s.pop_millions()?;
            let first = s.first_case_index()?;
            let f = |v: &[u64]| -> Vec<f64> {
                daily_from_cumulative(v)
                    .into_iter()
                    .map(|x| x as f64)
                    .collect()
            };
            let (cases, deaths) = (f(&s.cum_cases), f(&s.cum_deaths));
            let (mc, md) = (moving_average(&cases), moving_average(&deaths));
            Some(CountryDeviation {
                country_id: s.country_id.clone(),
                name: s.name.clone(),
                eiu_score: c.regime.eiu_score,
                regime_class: c.regime.regime_class,
                log_mean_deviation_cases: country_mean_log_deviation(
                    &cases,
                    &mc,
                    pop,
                    first..s.len(),
                )?,
                log_mean_deviation_deaths: country_mean_log_deviation(
                    &deaths,
                    &md,
                    pop,
                    first..s.len(),
                )?,
            })
        })
        .collect()
}

/// Count of panel rows per country, for reports.
pub fn rows_per_country(panel: &DeviationPanel) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    for r in &panel.rows {
        *m.entry(r.country_id.clone()).or_insert(0) += 1;
    }
    m
}

/// Regression of a panel restricted to countries with a score, kept for
/// callers that need the error when nothing is left.
pub fn require_rows(panel: &DeviationPanel) -> Result<()> {
    if panel.is_empty() {
        return Err(Error::InvalidParameter("panel has no rows".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{CountrySeries, DataSource, DropReport, ImputedFlags, Region};
    use crate::regimes::RegimeRecord;

    fn country(
        id: &str,
        eiu: f64,
        pop: Option<u64>,
        daily_cases: &[u64],
        start: NaiveDate,
    ) -> JoinedCountry {
        let mut acc = 0;
        let cum: Vec<u64> = daily_cases
            .iter()
            .map(|d| {
                acc += d;
                acc
            })
            .collect();
        JoinedCountry {
            series: CountrySeries {
                country_id: id.into(),
                name: id.into(),
                population: pop,
                latitude: Some(45.0),
                dates: start.iter_days().take(cum.len()).collect(),
                cum_deaths: cum.iter().map(|c| c / 10).collect(),
                cum_cases: cum,
            },
            regime: RegimeRecord::new(id, eiu, Some(eiu * 10.0), None, Some(0)).unwrap(),
            covariates: CovariateRecord {
                country_id: id.into(),
                region: Region::EuropeCentralAsia,
                population: pop,
                gdp_per_capita: Some(1000.0),
                trade_pct_gdp: Some(50.0),
                health_pct_gdp: Some(5.0),
                share_65plus: Some(10.0),
                imputed_flags: ImputedFlags::default(),
            },
        }
    }

    fn dataset(countries: Vec<JoinedCountry>) -> JoinedDataset {
        JoinedDataset {
            source: DataSource::Jhu,
            end_date: crate::ingest::default_end_date(),
            snapshot: String::new(),
            countries,
            drops: DropReport::default(),
        }
    }

    fn d(m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, m, day).unwrap()
    }

    #[test]
    fn late_first_case_contributes_nothing() {
        // Series runs to June 30; first case on June 29.
        let mut daily = vec![0u64; 30];
        daily[28] = 3;
        daily[29] = 1;
        let data = dataset(vec![country("X", 5.0, Some(1_000_000), &daily, d(6, 1))]);
        assert!(build_panel(&data).is_empty());
    }

    #[test]
    fn perfectly_smooth_country_at_one_million() {
        let data = dataset(vec![country("X", 5.0, Some(1_000_000), &[10; 20], d(3, 1))]);
        let panel = build_panel(&data);
        assert_eq!(panel.len(), 14);
        for r in &panel.rows {
            assert_eq!(r.depvar_cases, 0.0);
            assert_eq!(r.depvar_deaths, 0.0);
        }
        assert_eq!(panel.rows[0].date, d(3, 4));
    }

    #[test]
    fn rows_start_at_first_case() {
        let mut daily = vec![0u64; 5];
        daily.extend([2, 4, 1, 7, 3, 9, 4, 6, 8, 5, 2, 3]);
        let data = dataset(vec![country("X", 5.0, Some(2_000_000), &daily, d(3, 1))]);
        let panel = build_panel(&data);
        assert_eq!(panel.rows[0].date, d(3, 6));
        assert_eq!(panel.len(), daily.len() - 5 - 3);
    }

    #[test]
    fn missing_population_is_excluded() {
        let data = dataset(vec![
            country("A", 5.0, None, &[1; 20], d(3, 1)),
            country("B", 5.0, Some(5), &[1; 20], d(3, 1)),
        ]);
        let panel = build_panel(&data);
        assert_eq!(panel.excluded.len(), 1);
        assert_eq!(panel.excluded[0].country_id, "A");
        assert!(panel.rows.iter().all(|r| r.country_id == "B"));
    }

    #[test]
    fn zero_outcome_gives_zero_coefficients() {
        let data = dataset(vec![
            country("A", 2.0, Some(1_000_000), &[10; 20], d(3, 1)),
            country("B", 9.0, Some(1_000_000), &[3; 20], d(3, 1)),
            country("C", 6.5, Some(1_000_000), &[7; 20], d(3, 1)),
        ]);
        let panel = build_panel(&data);
        let res = run_test1(
            &panel,
            Test1Spec {
                index: IndexSource::Eiu,
                outcome: Outcome::Cases,
                with_controls: false,
                transform: CovariateTransform::Log,
            },
        )
        .unwrap();
        for t in &res.terms {
            assert_eq!(t.coefficient, 0.0);
        }
        assert_eq!(res.n_observations, panel.len());
        assert_eq!(res.n_clusters, 3);
    }

    #[test]
    fn missing_scores_drop_rows_only_for_that_index() {
        let mut data = dataset(vec![
            country(
                "A",
                2.0,
                Some(1_000_000),
                &[1, 5, 2, 8, 3, 9, 1, 4, 7, 2, 6, 3],
                d(3, 1),
            ),
            country(
                "B",
                9.0,
                Some(3_000_000),
                &[4, 5, 9, 2, 6, 8, 1, 9, 2, 7, 3, 5],
                d(3, 1),
            ),
            country(
                "C",
                6.5,
                Some(2_000_000),
                &[2, 2, 3, 9, 4, 1, 6, 8, 2, 3, 9, 1],
                d(3, 1),
            ),
        ]);
        data.countries[2].regime.vdem_score_raw = None;
        data.countries[1].regime.vdem_score_raw = Some(0.8);
        data.countries[0].regime.vdem_score_raw = Some(0.2);
        let panel = build_panel(&data);
        let spec = |index| Test1Spec {
            index,
            outcome: Outcome::Deaths,
            with_controls: false,
            transform: CovariateTransform::Log,
        };
        let eiu = run_test1(&panel, spec(IndexSource::Eiu)).unwrap();
        let vdem = run_test1(&panel, spec(IndexSource::Vdem)).unwrap();
        assert_eq!(eiu.n_observations, 18);
        assert_eq!(vdem.n_observations, 12);
        assert_eq!(vdem.n_clusters, 2);
    }

    #[test]
    fn quantiles_follow_linear_interpolation() {
        let d = Distribution::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!((d.q25, d.median, d.q75, d.mean), (1.75, 2.5, 3.25, 2.5));
        let one = Distribution::of(&[7.5]).unwrap();
        assert_eq!((one.median, one.mean), (7.5, 7.5));
        assert!(Distribution::of(&[]).is_none());
    }

    #[test]
    fn aggregate_series_sums_members() {
        let data = dataset(vec![
            country("A", 2.0, Some(1_000_000), &[1, 2], d(3, 1)),
            country("B", 3.0, Some(1_000_000), &[3, 4], d(3, 1)),
        ]);
        let agg = regime_aggregate_series(&data);
        let auth: Vec<_> = agg
            .iter()
            .filter(|r| r.regime_class == RegimeClass::Authoritarian)
            .collect();
        assert_eq!(
            auth.iter().map(|r| r.new_cases).collect::<Vec<_>>(),
            vec![4, 6]
        );
        assert_eq!(auth[1].cum_cases_per_million, 5.0);
        assert!(auth.iter().all(|r| r.ma_cases_per_million.is_none()));
    }

    #[test]
    fn cfr_is_undefined_without_cases() {
        let data = dataset(vec![country(
            "A",
            2.0,
            Some(1_000_000),
            &[0, 0, 20],
            d(3, 1),
        )]);
        let agg = regime_aggregate_series(&data);
        assert_eq!(agg[0].cfr, None);
        assert_eq!(agg[1].cfr, None);
        assert_eq!(agg[2].cfr, Some(0.1));
    }

    #[test]
    fn burden_summary() {
        let data = dataset(vec![
            country("A", 2.0, Some(1_000_000), &[30, 70], d(3, 1)),
            country("B", 9.0, Some(3_000_000), &[300, 0], d(3, 1)),
        ]);
        let s = summary_by_regime(&data);
        let auth = &s.regimes[0];
        assert_eq!(auth.n_countries, 1);
        let c = auth.cases_per_million.unwrap();
        assert_eq!((c.median, c.mean), (100.0, 100.0));
        assert!((s.democracy_shares.population - 0.75).abs() < 1e-12);
        assert!((s.democracy_shares.cases - 0.75).abs() < 1e-12);
    }
}
