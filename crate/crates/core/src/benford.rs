//! First-digit test against Benford's law.
//!
//! Only days on which the 7-day centered moving average of daily counts is
//! growing quickly enter the test: cumulative counts during onset and
//! plateau repeat the same values and say little about manipulation. The
//! cumulative count observed on each qualifying day contributes its leading
//! digit to a pool per regime class, and each pool is compared with
//! `log10(1 + 1/d)` by a Pearson chi-squared test with 8 degrees of freedom.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CountrySeries, JoinedDataset};
use crate::regimes::RegimeClass;
use crate::timeseries::{growth_series, moving_average};
use crate::Outcome;

/// Degrees of freedom of the goodness-of-fit test (nine digits, no fitted
/// parameters).
pub const DOF: u32 = 8;

/// Significance level of the rejection flag.
pub const ALPHA: f64 = 0.01;

/// Leading decimal digit of a positive integer.
pub fn first_significant_digit(n: i64) -> Result<u8> {
    if n <= 0 {
        return Err(Error::NonPositive(n));
    }
    let mut n = n;
    while n >= 10 {
        n /= 10;
    }
    Ok(n as u8)
}

/// Benford probability of leading digit `d` (1 through 9).
pub fn benford_expected(d: u8) -> f64 {
    assert!((1..=9).contains(&d), "digit {d} outside 1..=9");
    (1.0 + 1.0 / d as f64).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// growth >= cutoff
    AtLeast,
    /// growth > cutoff
    Greater,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    /// Minimum day-over-day growth of the moving average, e.g. 0.075.
    pub cutoff: f64,
    pub outcome: Outcome,
    pub comparison: Comparison,
}

impl ScreeningConfig {
    pub fn new(cutoff: f64, outcome: Outcome) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff must be positive, got {cutoff}"
            )));
        }
        Ok(ScreeningConfig {
            cutoff,
            outcome,
            comparison: Comparison::AtLeast,
        })
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.comparison = if strict {
            Comparison::Greater
        } else {
            Comparison::AtLeast
        };
        self
    }

    pub fn passes(&self, growth: f64) -> bool {
        match self.comparison {
            Comparison::AtLeast => growth >= self.cutoff,
            Comparison::Greater => growth > self.cutoff,
        }
    }
}

/// Counts of leading digits 1 through 9.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitHistogram {
    pub counts: [u64; 9],
}

impl DigitHistogram {
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut h = DigitHistogram::default();
        for v in values {
            h.add(v);
        }
        h
    }

    /// Adds the leading digit of `v`; zero has none and is skipped.
    pub fn add(&mut self, v: u64) {
        if let Ok(d) = first_significant_digit(v as i64) {
            self.counts[d as usize - 1] += 1;
        }
    }

    pub fn merge(mut self, other: &DigitHistogram) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn frequencies(&self) -> [f64; 9] {
        let n = self.total() as f64;
        self.counts
            .map(|c| if n > 0.0 { c as f64 / n } else { 0.0 })
    }
}

/// `sum_d (O_d - N p_d)^2 / (N p_d)`.
pub fn pearson_chi_square(hist: &DigitHistogram) -> Result<f64> {
    let n = hist.total();
    if n == 0 {
        return Err(Error::EmptyHistogram);
    }
    let n = n as f64;
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let e = n * benford_expected(i as u8 + 1);
            (o as f64 - e).powi(2) / e
        })
        .sum())
}

/// Upper tail of the chi-squared distribution for even `dof`:
/// `exp(-x/2) * sum_{j < dof/2} (x/2)^j / j!`.
pub fn chi_square_pvalue(x: f64, dof: u32) -> Result<f64> {
    if dof == 0 || !dof.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "closed-form tail needs an even positive dof, got {dof}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "statistic must be >= 0, got {x}"
        )));
    }
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..dof / 2 {
        term *= half / j as f64;
        sum += term;
    }
    Ok(((-half).exp() * sum).clamp(0.0, 1.0))
}

/// Cumulative counts observed on qualifying days, zeros removed.
pub fn screen_observations(series: &CountrySeries, config: &ScreeningConfig) -> Vec<u64> {
    let cum = series.cumulative(config.outcome);
    let daily: Vec<f64> = crate::timeseries::daily_from_cumulative(cum)
        .into_iter()
        .map(|v| v as f64)
        .collect();
    let growth = growth_series(&moving_average(&daily));
    growth
        .iter()
        .zip(cum)
        .filter(|(g, c)| **c > 0 && g.is_some_and(|g| config.passes(g)))
        .map(|(_, c)| *c)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenfordReport {
    pub regime_class: RegimeClass,
    pub histogram: DigitHistogram,
    /// `N log10(1 + 1/d)`.
    pub expected: [f64; 9],
    /// `None` when the pool is empty.
    pub chi_square: Option<f64>,
    pub p_value: Option<f64>,
    pub dof: u32,
    pub rejected: bool,
}

impl BenfordReport {
    pub fn from_histogram(regime_class: RegimeClass, histogram: DigitHistogram) -> Self {
        let n = histogram.total() as f64;
        let expected = std::array::from_fn(|i| n * benford_expected(i as u8 + 1));
        let chi_square = pearson_chi_square(&histogram).ok();
        let p_value = chi_square.map(|x| chi_square_pvalue(x, DOF).expect("dof is even"));
        BenfordReport {
            regime_class,
            histogram,
            expected,
            chi_square,
            p_value,
            dof: DOF,
            rejected: p_value.is_some_and(|p| p < ALPHA),
        }
    }
}

/// One report per regime class, in [`RegimeClass::ALL`] order.
pub fn benford_by_regime(data: &JoinedDataset, config: &ScreeningConfig) -> Vec<BenfordReport> {
    let per_country: Vec<(RegimeClass, DigitHistogram)> = data
        .countries
        .par_iter()
        .map(|c| {
            (
                c.regime.regime_class,
                DigitHistogram::from_values(screen_observations(&c.series, config)),
            )
        })
        .collect();
    RegimeClass::ALL
        .iter()
        .map(|&class| {
            let pooled = per_country
                .iter()
                .filter(|(c, _)| *c == class)
                .fold(DigitHistogram::default(), |acc, (_, h)| acc.merge(h));
            BenfordReport::from_histogram(class, pooled)
        })
        .collect()
}
