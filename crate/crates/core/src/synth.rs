//! Synthetic epidemics with known manipulation, for checking the detectors.
//!
//! Expected cumulative counts follow a logistic curve. Daily counts are the
//! curve's increments multiplied by independent mean-one gamma factors with
//! variance `noise_dispersion`, then rounded. Manipulation replaces each
//! reported daily count by a blend of the true count and its 7-day centered
//! moving average.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benford::{benford_by_regime, ScreeningConfig};
use crate::error::{Error, Result};
use crate::ingest::{
    files, CountrySeries, CovariateRecord, DataSource, DropReport, ImputedFlags, JoinedCountry,
    JoinedDataset, Region,
};
use crate::regimes::{IndexSource, RegimeClass, RegimeRecord};
use crate::smoothness::{build_panel, run_test1, terms, CovariateTransform, Test1Spec};
use crate::timeseries::{centered_ma7, daily_from_cumulative};
use crate::Outcome;

/// Significance level at which a detector flags a group.
pub const FLAG_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicParams {
    /// Expected final cumulative case count.
    pub carrying_capacity: f64,
    /// Logistic rate per day.
    pub growth_rate: f64,
    /// Day index at which half the carrying capacity is reached.
    pub midpoint_day: f64,
    /// Variance of the multiplicative noise on daily counts; 0 gives the
    /// rounded curve increments.
    pub noise_dispersion: f64,
    pub seed: u64,
    pub days: usize,
    pub start_date: NaiveDate,
    pub population: u64,
    /// Expected deaths per case.
    pub fatality_ratio: f64,
    /// Days from case report to death report.
    pub death_lag_days: usize,
}

impl Default for EpidemicParams {
    fn default() -> Self {
        EpidemicParams {
            carrying_capacity: 10_000.0,
            growth_rate: 0.15,
            midpoint_day: 60.0,
            noise_dispersion: 0.25,
            seed: 0,
            days: 150,
            start_date: NaiveDate::from_ymd_opt(2020, 1, 22).expect("valid date"),
            population: 10_000_000,
            fatality_ratio: 0.05,
            death_lag_days: 10,
        }
    }
}

impl EpidemicParams {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("carrying_capacity", self.carrying_capacity),
            ("growth_rate", self.growth_rate),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.noise_dispersion.is_finite() && self.noise_dispersion >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise_dispersion must be >= 0, got {}",
                self.noise_dispersion
            )));
        }
        if !(0.0..=1.0).contains(&self.fatality_ratio) {
            return Err(Error::InvalidParameter(format!(
                "fatality_ratio must lie in [0, 1], got {}",
                self.fatality_ratio
            )));
        }
        if self.days == 0 || self.population == 0 {
            return Err(Error::InvalidParameter(
                "days and population must be positive".into(),
            ));
        }
        Ok(())
    }

    fn logistic(&self, t: f64) -> f64 {
        self.carrying_capacity / (1.0 + (-self.growth_rate * (t - self.midpoint_day)).exp())
    }

    /// Expected new cases on each day. Day 0 carries the whole curve up to
    /// that point.
    pub fn mean_increments(&self) -> Vec<f64> {
        (0..self.days)
            .map(|t| {
                let prev = if t == 0 {
                    0.0
                } else {
                    self.logistic(t as f64 - 1.0)
                };
                self.logistic(t as f64) - prev
            })
            .collect()
    }
}

fn draw_counts(means: &[f64], dispersion: f64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let gamma = (dispersion > 0.0)
        .then(|| Gamma::new(1.0 / dispersion, dispersion).expect("positive shape and scale"));
    means
        .iter()
        .map(|&mu| {
            let factor = gamma.as_ref().map_or(1.0, |g| g.sample(rng));
            (mu * factor).round().max(0.0) as u64
        })
        .collect()
}

fn prefix_sum(daily: &[u64]) -> Vec<u64> {
    daily
        .iter()
        .scan(0u64, |acc, d| {
            *acc += d;
            Some(*acc)
        })
        .collect()
}

/// Draw one synthetic country. The same parameters always give the same
/// series.
pub fn generate_epidemic(country_id: &str, params: &EpidemicParams) -> Result<CountrySeries> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let case_means = params.mean_increments();
    let death_means: Vec<f64> = (0..params.days)
        .map(|t| {
            t.checked_sub(params.death_lag_days)
                .map_or(0.0, |s| params.fatality_ratio * case_means[s])
        })
        .collect();
    let cases = draw_counts(&case_means, params.noise_dispersion, &mut rng);
    let deaths = draw_counts(&death_means, params.noise_dispersion, &mut rng);
    Ok(CountrySeries {
        country_id: country_id.to_string(),
        name: country_id.to_string(),
        population: Some(params.population),
        latitude: None,
        dates: params.start_date.iter_days().take(params.days).collect(),
        cum_cases: prefix_sum(&cases),
        cum_deaths: prefix_sum(&deaths),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManipulationMode {
    None,
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManipulationSpec {
    pub mode: ManipulationMode,
    /// Weight on the moving average, in [0, 1].
    pub smoothing_weight: f64,
}

impl ManipulationSpec {
    pub fn none() -> Self {
        ManipulationSpec {
            mode: ManipulationMode::None,
            smoothing_weight: 0.0,
        }
    }

    pub fn smooth(smoothing_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&smoothing_weight) {
            return Err(Error::InvalidParameter(format!(
                "smoothing weight must lie in [0, 1], got {smoothing_weight}"
            )));
        }
        Ok(ManipulationSpec {
            mode: ManipulationMode::Smooth,
            smoothing_weight,
        })
    }

    fn weight(&self) -> f64 {
        match self.mode {
            ManipulationMode::None => 0.0,
            ManipulationMode::Smooth => self.smoothing_weight,
        }
    }
}

fn smooth_daily(daily: &[i64], lambda: f64) -> Vec<i64> {
    let x: Vec<f64> = daily.iter().map(|&v| v as f64).collect();
    daily
        .iter()
        .enumerate()
        .map(|(t, &d)| match centered_ma7(&x, t) {
            Some(ma) if lambda > 0.0 => (lambda * ma + (1.0 - lambda) * d as f64).round() as i64,
            _ => d,
        })
        .collect()
}

fn rebuild_cumulative(daily: &[i64]) -> Vec<u64> {
    daily
        .iter()
        .scan(0i64, |acc, d| {
            *acc += d;
            Some((*acc).max(0) as u64)
        })
        .collect()
}

/// Replace the reported daily counts of cases and deaths by
/// `round(λ ma + (1 - λ) true)` wherever the 7-day window is complete and
/// rebuild the cumulative series from them. Days at either end are left
/// unchanged.
pub fn apply_manipulation(series: &CountrySeries, spec: &ManipulationSpec) -> CountrySeries {
    let lambda = spec.weight();
    if lambda == 0.0 {
        return series.clone();
    }
    let cases = smooth_daily(&daily_from_cumulative(&series.cum_cases), lambda);
    let deaths = smooth_daily(&daily_from_cumulative(&series.cum_deaths), lambda);
    CountrySeries {
        cum_cases: rebuild_cumulative(&cases),
        cum_deaths: rebuild_cumulative(&deaths),
        ..series.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    /// Smoothness regression.
    Test1,
    /// Benford first-digit test.
    Test2,
}

impl Detector {
    pub fn label(self) -> &'static str {
        match self {
            Detector::Test1 => "test1",
            Detector::Test2 => "test2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub countries_per_group: usize,
    /// Smoothing weights applied to the low-score group.
    pub lambda_grid: Vec<f64>,
    pub detector: Detector,
    pub replications: usize,
    pub seed: u64,
    pub outcome: Outcome,
    /// Growth cutoff used by the digit test.
    pub cutoff: f64,
    pub days: usize,
    pub noise_dispersion: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            countries_per_group: 50,
            lambda_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            detector: Detector::Test1,
            replications: 500,
            seed: 20200630,
            outcome: Outcome::Cases,
            cutoff: 0.075,
            days: 120,
            noise_dispersion: 0.25,
        }
    }
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.countries_per_group < 2 || self.replications == 0 || self.days < 8 {
            return Err(Error::InvalidParameter(
                "need at least 2 countries per group, 1 replication and 8 days".into(),
            ));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidParameter("lambda grid is empty".into()));
        }
        for &l in &self.lambda_grid {
            ManipulationSpec::smooth(l)?;
        }
        ScreeningConfig::new(self.cutoff, self.outcome)?;
        if !(self.noise_dispersion.is_finite() && self.noise_dispersion >= 0.0) {
            return Err(Error::InvalidParameter(
                "noise_dispersion must be >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Read `key = value` lines. Blank lines and `#` comments are ignored;
    /// keys not given keep their defaults.
    pub fn from_scenario(text: &str) -> Result<Self> {
        let mut cfg = PowerConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::Format {
                file: "scenario".into(),
                reason: format!("line {}: {reason}", i + 1),
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(&format!("{key}: not a number: {v}")))
            };
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| bad(&format!("{key}: not an integer: {v}")))
            };
            match key {
                "countries_per_group" => cfg.countries_per_group = int(value)? as usize,
                "lambda_grid" | "lambdas" => {
                    cfg.lambda_grid = value
                        .split(',')
                        .map(|v| num(v.trim()))
                        .collect::<Result<_>>()?
                }
                "detector" => {
                    cfg.detector = match value {
                        "test1" => Detector::Test1,
                        "test2" => Detector::Test2,
                        _ => return Err(bad(&format!("unknown detector {value}"))),
                    }
                }
                "replications" => cfg.replications = int(value)? as usize,
                "seed" => cfg.seed = int(value)?,
                "outcome" => {
                    cfg.outcome = match value {
                        "cases" => Outcome::Cases,
                        "deaths" => Outcome::Deaths,
                        _ => return Err(bad(&format!("unknown outcome {value}"))),
                    }
                }
                "cutoff" => cfg.cutoff = num(value)?,
                "days" => cfg.days = int(value)? as usize,
                "noise_dispersion" => cfg.noise_dispersion = num(value)?,
                _ => return Err(bad(&format!("unknown key {key}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Share of replications in which the manipulated group was flagged, at
/// one smoothing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub detector: Detector,
    pub smoothing_weight: f64,
    pub replications: usize,
    pub flagged: usize,
    pub power: f64,
}

/// Low scores for the group that may be manipulated, high scores for the
/// honest group.
const MANIPULATED_EIU: (f64, f64) = (1.5, 3.5);
const HONEST_EIU: (f64, f64) = (8.0, 9.5);

fn random_params(rng: &mut ChaCha8Rng, cfg: &PowerConfig) -> EpidemicParams {
    let population = 10f64.powf(rng.random_range(6.0..8.0)).round() as u64;
    let attack = 10f64.powf(rng.random_range(-3.0..-2.0));
    let days = cfg.days as f64;
    EpidemicParams {
        carrying_capacity: attack * population as f64,
        growth_rate: rng.random_range(0.12..0.25),
        midpoint_day: rng.random_range(0.3 * days..0.5 * days),
        noise_dispersion: cfg.noise_dispersion,
        seed: rng.random(),
        days: cfg.days,
        population,
        fatality_ratio: rng.random_range(0.02..0.08),
        ..EpidemicParams::default()
    }
}

fn synthetic_country(id: String, series: CountrySeries, eiu: f64) -> JoinedCountry {
    let population = series.population;
    JoinedCountry {
        series: CountrySeries {
            country_id: id.clone(),
            name: id.clone(),
            ..series
        },
        regime: RegimeRecord::new(id.clone(), eiu, None, None, None).expect("score in range"),
        covariates: CovariateRecord {
            country_id: id,
            region: Region::EuropeCentralAsia,
            population,
            gdp_per_capita: None,
            trade_pct_gdp: None,
            health_pct_gdp: None,
            share_65plus: None,
            imputed_flags: ImputedFlags::default(),
        },
    }
}

/// Two groups of synthetic countries: `n` low-score countries smoothed with
/// weight `lambda` and `n` untouched high-score countries.
pub fn synthetic_panel(cfg: &PowerConfig, lambda: f64, seed: u64) -> Result<JoinedDataset> {
    let spec = ManipulationSpec::smooth(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut countries = Vec::with_capacity(2 * cfg.countries_per_group);
    for (group, (lo, hi)) in [(0, MANIPULATED_EIU), (1, HONEST_EIU)] {
        for i in 0..cfg.countries_per_group {
            let params = random_params(&mut rng, cfg);
            let eiu = rng.random_range(lo..=hi);
            let id = format!("G{group}C{i:03}");
            let truth = generate_epidemic(&id, &params)?;
            let reported = if group == 0 {
                apply_manipulation(&truth, &spec)
            } else {
                truth
            };
            countries.push(synthetic_country(id, reported, eiu));
        }
    }
    let end_date = countries[0]
        .series
        .dates
        .last()
        .copied()
        .expect("days >= 8");
    Ok(JoinedDataset {
        source: DataSource::Jhu,
        end_date,
        snapshot: format!("synthetic-{seed}"),
        countries,
        drops: DropReport::default(),
    })
}

fn flagged(cfg: &PowerConfig, data: &JoinedDataset) -> Result<bool> {
    match cfg.detector {
        Detector::Test1 => {
            let panel = build_panel(data);
            let fit = run_test1(
                &panel,
                Test1Spec {
                    index: IndexSource::Eiu,
                    outcome: cfg.outcome,
                    with_controls: false,
                    transform: CovariateTransform::Log,
                },
            )?;
            let t = fit.term(terms::DEMOCRACY).expect("democracy term present");
            Ok(t.coefficient > 0.0 && t.p_value < FLAG_ALPHA)
        }
        Detector::Test2 => {
            let screen = ScreeningConfig::new(cfg.cutoff, cfg.outcome)?;
            Ok(benford_by_regime(data, &screen)
                .iter()
                .find(|r| r.regime_class == RegimeClass::Authoritarian)
                .is_some_and(|r| r.p_value.is_some_and(|p| p < FLAG_ALPHA)))
        }
    }
}

/// Seed of replication `rep` at grid point `point`, derived from the master
/// seed so every cell of the table can be replayed on its own.
pub fn replication_seed(master: u64, point: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((point as u64) << 32) | rep as u64);
    rng.random()
}

/// Estimate detection rates over the smoothing-weight grid. Replications run
/// in parallel; results do not depend on the thread count.
pub fn power_experiment(cfg: &PowerConfig) -> Result<Vec<PowerRow>> {
    cfg.validate()?;
    cfg.lambda_grid
        .iter()
        .enumerate()
        .map(|(point, &lambda)| {
            let hits = (0..cfg.replications)
                .into_par_iter()
                .map(|rep| {
                    let data =
                        synthetic_panel(cfg, lambda, replication_seed(cfg.seed, point, rep))?;
                    flagged(cfg, &data)
                })
                .collect::<Result<Vec<bool>>>()?;
            let flagged = hits.iter().filter(|h| **h).count();
            Ok(PowerRow {
                detector: cfg.detector,
                smoothing_weight: lambda,
                replications: cfg.replications,
                flagged,
                power: flagged as f64 / cfg.replications as f64,
            })
        })
        .collect()
}

/// Fictional countries of the demonstration snapshot: code, name, EIU score.
const DEMO_COUNTRIES: [(&str, &str, f64); 24] = [
    ("XAA", "Aldoria", 1.9),
    ("XAB", "Borvania", 2.4),
    ("XAC", "Cestral", 2.9),
    ("XAD", "Dravik", 3.1),
    ("XAE", "Eskaron", 3.6),
    ("XAF", "Fenmark", 3.9),
    ("XAG", "Galdor", 4.3),
    ("XAH", "Halvetia", 4.7),
    ("XAI", "Istrova", 5.0),
    ("XAJ", "Jorvik Isles", 5.4),
    ("XAK", "Kelmora", 5.7),
    ("XAL", "Lunesse", 5.95),
    ("XAM", "Marisca", 6.2),
    ("XAN", "Norvale", 6.6),
    ("XAO", "Ostenland", 6.9),
    ("XAP", "Pelluria", 7.3),
    ("XAQ", "Quorra", 7.6),
    ("XAR", "Rhovan", 7.9),
    ("XAS", "Solmere", 8.2),
    ("XAT", "Tavaris", 8.5),
    ("XAU", "Ulmstead", 8.8),
    ("XAV", "Veridia", 9.1),
    ("XAW", "Westmarch", 9.4),
    ("XAX", "Yselle", 9.7),
];

fn demo_lambda(class: RegimeClass) -> f64 {
    match class {
        RegimeClass::Authoritarian => 1.0,
        RegimeClass::Hybrid => 0.6,
        RegimeClass::FlawedDemocracy | RegimeClass::FullDemocracy => 0.0,
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))
}

/// Write a complete input snapshot of fictional countries to `dir`: both
/// epidemic formats, the democracy and covariate tables and an alias file.
/// Countries classed authoritarian report fully smoothed series, hybrid
/// regimes partly smoothed ones.
pub fn write_demo_snapshot(dir: &Path, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let start = NaiveDate::from_ymd_opt(2020, 1, 22).expect("valid date");
    let end = NaiveDate::from_ymd_opt(2020, 6, 30).expect("valid date");
    let days = (end - start).num_days() as usize + 1;
    let dates: Vec<NaiveDate> = start.iter_days().take(days).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut confirmed = String::from("Province/State,Country/Region,Lat,Long");
    for d in &dates {
        write!(confirmed, ",{}", d.format("%-m/%-d/%y")).expect("string write");
    }
    confirmed.push('\n');
    let mut deaths = confirmed.clone();
    let mut ecdc = String::from("dateRep,cases,deaths,countriesAndTerritories\n");
    let mut democracy = String::from("country,eiu,fh,vdem,polity5\n");
    let mut worldbank = String::from(
        "country,region,population,gdp_per_capita,trade_pct_gdp,health_pct_gdp,share_65plus\n",
    );
    let mut aliases = String::from("iso3,alias\n");

    for (i, &(code, name, eiu)) in DEMO_COUNTRIES.iter().enumerate() {
        let class = crate::regimes::classify_eiu(eiu)?;
        let population = 10f64.powf(rng.random_range(6.0..8.2)).round() as u64;
        let params = EpidemicParams {
            carrying_capacity: 10f64.powf(rng.random_range(-3.2..-2.0)) * population as f64,
            growth_rate: rng.random_range(0.10..0.22),
            midpoint_day: rng.random_range(55.0..110.0),
            noise_dispersion: 0.3,
            seed: rng.random(),
            days,
            start_date: start,
            population,
            fatality_ratio: rng.random_range(0.02..0.09),
            death_lag_days: 10,
        };
        let truth = generate_epidemic(code, &params)?;
        let reported = apply_manipulation(&truth, &ManipulationSpec::smooth(demo_lambda(class))?);

        let lat: f64 = rng.random_range(-35.0..62.0);
        let long: f64 = rng.random_range(-120.0..140.0);
        for (out, cum) in [
            (&mut confirmed, &reported.cum_cases),
            (&mut deaths, &reported.cum_deaths),
        ] {
            write!(out, ",{name},{lat:.4},{long:.4}").expect("string write");
            for c in cum {
                write!(out, ",{c}").expect("string write");
            }
            out.push('\n');
        }
        let new_c = daily_from_cumulative(&reported.cum_cases);
        let new_d = daily_from_cumulative(&reported.cum_deaths);
        let ecdc_name = name.replace(' ', "_");
        for (t, d) in dates.iter().enumerate() {
            writeln!(
                ecdc,
                "{},{},{},{ecdc_name}",
                d.format("%d/%m/%Y"),
                new_c[t],
                new_d[t]
            )
            .expect("string write");
        }

        let fh = (eiu * 10.0 + rng.random_range(-6.0..6.0))
            .clamp(0.0, 100.0)
            .round();
        let vdem = (eiu / 10.0 + rng.random_range(-0.06..0.06)).clamp(0.0, 1.0);
        let polity = if i % 7 == 3 {
            String::new()
        } else {
            ((eiu * 2.0 - 10.0).round() as i32)
                .clamp(-10, 10)
                .to_string()
        };
        writeln!(democracy, "{name},{eiu},{fh},{vdem:.3},{polity}").expect("string write");

        let region = Region::ALL[i % Region::ALL.len()];
        let gdp = 10f64.powf(rng.random_range(2.8..4.9) + 0.05 * eiu);
        let trade = rng.random_range(25.0..140.0);
        let health = if i % 9 == 4 {
            String::new()
        } else {
            format!("{:.2}", rng.random_range(2.5..11.0))
        };
        let elderly = rng.random_range(2.0..22.0);
        writeln!(
            worldbank,
            "{name},{},{population},{gdp:.1},{trade:.1},{health},{elderly:.2}",
            region.label()
        )
        .expect("string write");
        writeln!(aliases, "{code},{name}").expect("string write");
    }

    write_file(dir, files::JHU_CONFIRMED, &confirmed)?;
    write_file(dir, files::JHU_DEATHS, &deaths)?;
    write_file(dir, files::ECDC, &ecdc)?;
    write_file(dir, files::DEMOCRACY, &democracy)?;
    write_file(dir, files::WORLDBANK, &worldbank)?;
    write_file(dir, files::ALIASES, &aliases)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::{moving_average, smoothness_depvar};

    fn daily(s: &CountrySeries) -> Vec<i64> {
        daily_from_cumulative(&s.cum_cases)
    }

    #[test]
    fn zero_dispersion_gives_rounded_increments() {
        let p = EpidemicParams {
            noise_dispersion: 0.0,
            ..EpidemicParams::default()
        };
        let s = generate_epidemic("X", &p).unwrap();
        let expected: Vec<i64> = p
            .mean_increments()
            .iter()
            .map(|m| m.round() as i64)
            .collect();
        assert_eq!(daily(&s), expected);
    }

    #[test]
    fn same_seed_same_series() {
        let p = EpidemicParams {
            seed: 42,
            ..EpidemicParams::default()
        };
        assert_eq!(
            generate_epidemic("X", &p).unwrap(),
            generate_epidemic("X", &p).unwrap()
        );
        let q = EpidemicParams {
            seed: 43,
            ..p.clone()
        };
        assert_ne!(
            generate_epidemic("X", &p).unwrap(),
            generate_epidemic("X", &q).unwrap()
        );
    }

    #[test]
    fn cumulative_is_non_decreasing() {
        let s = generate_epidemic("X", &EpidemicParams::default()).unwrap();
        assert!(s.cum_cases.windows(2).all(|w| w[0] <= w[1]));
        assert!(s.cum_deaths.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn mean_final_size_is_near_capacity() {
        let base = EpidemicParams::default();
        let n = 200;
        let total: f64 = (0..n)
            .map(|seed| {
                let p = EpidemicParams {
                    seed,
                    ..base.clone()
                };
                *generate_epidemic("X", &p)
                    .unwrap()
                    .cum_cases
                    .last()
                    .unwrap() as f64
            })
            .sum();
        let mean = total / n as f64;
        assert!(
            (mean / base.carrying_capacity - 1.0).abs() < 0.02,
            "mean {mean}"
        );
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = EpidemicParams {
            growth_rate: 0.0,
            ..EpidemicParams::default()
        };
        assert!(generate_epidemic("X", &p).is_err());
        assert!(ManipulationSpec::smooth(1.5).is_err());
    }

    #[test]
    fn zero_weight_is_identity() {
        let s = generate_epidemic("X", &EpidemicParams::default()).unwrap();
        assert_eq!(
            apply_manipulation(&s, &ManipulationSpec::smooth(0.0).unwrap()),
            s
        );
        assert_eq!(apply_manipulation(&s, &ManipulationSpec::none()), s);
    }

    #[test]
    fn full_weight_reports_the_rounded_average() {
        let s = generate_epidemic("X", &EpidemicParams::default()).unwrap();
        let m = apply_manipulation(&s, &ManipulationSpec::smooth(1.0).unwrap());
        let truth: Vec<f64> = daily(&s).iter().map(|&v| v as f64).collect();
        let ma = moving_average(&truth);
        for (t, r) in daily(&m).iter().enumerate() {
            match ma[t] {
                Some(a) => assert_eq!(*r, a.round() as i64),
                None => assert_eq!(*r, truth[t] as i64),
            }
        }
    }

    fn deviation_variance(s: &CountrySeries) -> f64 {
        let x: Vec<f64> = daily(s).iter().map(|&v| v as f64).collect();
        let dev: Vec<f64> = moving_average(&x)
            .iter()
            .zip(&x)
            .filter_map(|(m, v)| m.map(|m| v - m))
            .collect();
        let mean = dev.iter().sum::<f64>() / dev.len() as f64;
        dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / dev.len() as f64
    }

    #[test]
    fn half_weight_variance_lies_between() {
        let s = generate_epidemic(
            "X",
            &EpidemicParams {
                seed: 7,
                ..EpidemicParams::default()
            },
        )
        .unwrap();
        let v = |l: f64| {
            deviation_variance(&apply_manipulation(
                &s,
                &ManipulationSpec::smooth(l).unwrap(),
            ))
        };
        let (v0, v5, v1) = (v(0.0), v(0.5), v(1.0));
        assert!(v1 < v5 && v5 < v0, "{v1} {v5} {v0}");
    }

    #[test]
    fn full_smoothing_pushes_depvar_to_floor() {
        let s = generate_epidemic("X", &EpidemicParams::default()).unwrap();
        let m = apply_manipulation(&s, &ManipulationSpec::smooth(1.0).unwrap());
        let pop_m = 10.0;
        let mean_depvar = |s: &CountrySeries| {
            let x: Vec<f64> = daily(s).iter().map(|&v| v as f64).collect();
            let v: Vec<f64> = moving_average(&x)
                .iter()
                .zip(&x)
                .filter_map(|(m, o)| m.map(|m| smoothness_depvar(*o, m, pop_m)))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean_depvar(&m) < mean_depvar(&s) - 1.0);

        let exact = EpidemicParams {
            noise_dispersion: 0.0,
            ..EpidemicParams::default()
        };
        let smooth = apply_manipulation(
            &generate_epidemic("X", &exact).unwrap(),
            &ManipulationSpec::smooth(1.0).unwrap(),
        );
        assert!(mean_depvar(&smooth) - (1.0 / pop_m).ln() < 1.0);
    }

    #[test]
    fn smoothing_preserves_totals_within_rounding() {
        for seed in 0..20 {
            let s = generate_epidemic(
                "X",
                &EpidemicParams {
                    seed,
                    ..EpidemicParams::default()
                },
            )
            .unwrap();
            for l in [0.3, 0.5, 1.0] {
                let m = apply_manipulation(&s, &ManipulationSpec::smooth(l).unwrap());
                let diff = m
                    .cum_cases
                    .last()
                    .unwrap()
                    .abs_diff(*s.cum_cases.last().unwrap());
                assert!(diff as usize <= s.len());
            }
        }
    }

    #[test]
    fn scenario_file_overrides_defaults() {
        let cfg = PowerConfig::from_scenario(
            "# quick run\ncountries_per_group = 10\nlambda_grid = 0, 1\ndetector = test2\nseed=9\n",
        )
        .unwrap();
        assert_eq!(cfg.countries_per_group, 10);
        assert_eq!(cfg.lambda_grid, vec![0.0, 1.0]);
        assert_eq!(cfg.detector, Detector::Test2);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.replications, PowerConfig::default().replications);
        assert!(PowerConfig::from_scenario("bogus = 1").is_err());
        assert!(PowerConfig::from_scenario("lambda_grid = 2").is_err());
    }

    #[test]
    fn power_table_is_reproducible() {
        let cfg = PowerConfig {
            countries_per_group: 8,
            lambda_grid: vec![0.0, 1.0],
            replications: 6,
            ..PowerConfig::default()
        };
        let a = power_experiment(&cfg).unwrap();
        assert_eq!(a, power_experiment(&cfg).unwrap());
        assert_eq!(a.len(), 2);
        assert!(a[1].flagged > a[0].flagged);
    }

    #[test]
    fn demo_snapshot_loads() {
        let dir = tempfile::tempdir().unwrap();
        write_demo_snapshot(dir.path(), 1).unwrap();
        let paths = crate::ingest::SourcePaths::from_dir(dir.path());
        let jhu =
            crate::ingest::load_dataset(&paths, DataSource::Jhu, crate::ingest::default_end_date())
                .unwrap();
        let ecdc = crate::ingest::load_dataset(
            &paths,
            DataSource::Ecdc,
            crate::ingest::default_end_date(),
        )
        .unwrap();
        assert_eq!(jhu.countries.len(), DEMO_COUNTRIES.len());
        assert_eq!(jhu.drops.total(), 0);
        for (a, b) in jhu.countries.iter().zip(&ecdc.countries) {
            assert_eq!(a.series.cum_cases, b.series.cum_cases);
            assert_eq!(a.series.name, b.series.name);
        }
    }
}
