//! Daily differences, the 7-day centered moving average and the
//! smoothness outcome built from them.
//!
//! A moving-average value exists only where the whole window
//! `t-3 ..= t+3` is observed, so the first and last three days of every
//! series have none.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Half width of the centered window.
pub const HALF_WINDOW: usize = 3;
pub const WINDOW: usize = 2 * HALF_WINDOW + 1;

/// Daily new counts. Values can be negative when a source revises its
/// cumulative total downward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub country_id: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<i64>,
}

impl DailySeries {
    pub fn from_cumulative(
        country_id: impl Into<String>,
        dates: &[NaiveDate],
        cum: &[u64],
    ) -> Self {
        DailySeries {
            country_id: country_id.into(),
            dates: dates.to_vec(),
            values: daily_from_cumulative(cum),
        }
    }
}

/// Centered moving average restricted to dates with a complete window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingAverageSeries {
    pub country_id: String,
    pub dates: Vec<NaiveDate>,
    pub ma_values: Vec<f64>,
}

impl MovingAverageSeries {
    pub fn centered7(daily: &DailySeries) -> Self {
        let x: Vec<f64> = daily.values.iter().map(|&v| v as f64).collect();
        let (dates, ma_values) = moving_average(&x)
            .into_iter()
            .zip(&daily.dates)
            .filter_map(|(m, d)| m.map(|m| (*d, m)))
            .unzip();
        MovingAverageSeries {
            country_id: daily.country_id.clone(),
            dates,
            ma_values,
        }
    }

    pub fn at(&self, date: NaiveDate) -> Option<f64> {
        self.dates
            .binary_search(&date)
            .ok()
            .map(|i| self.ma_values[i])
    }

    /// Day-over-day growth of the average at `date`.
    pub fn growth_at(&self, date: NaiveDate) -> Option<f64> {
        let i = self.dates.binary_search(&date).ok()?;
        if i == 0 || self.dates[i - 1].succ_opt()? != date {
            return None;
        }
        ma_growth_rate(self.ma_values[i - 1], self.ma_values[i])
    }
}

/// First differences of a cumulative series, taking the count before the
/// first observation as zero.
pub fn daily_from_cumulative(cum: &[u64]) -> Vec<i64> {
    let mut prev = 0i64;
    cum.iter()
        .map(|&c| {
            let c = c as i64;
            let d = c - prev;
            prev = c;
            d
        })
        .collect()
}

/// Mean of `x[t-3..=t+3]`, or `None` if the window runs off either end.
pub fn centered_ma7(x: &[f64], t: usize) -> Option<f64> {
    if t < HALF_WINDOW || t + HALF_WINDOW >= x.len() {
        return None;
    }
    let sum: f64 = x[t - HALF_WINDOW..=t + HALF_WINDOW].iter().sum();
    Some(sum / WINDOW as f64)
}

/// [`centered_ma7`] at every index.
pub fn moving_average(x: &[f64]) -> Vec<Option<f64>> {
    (0..x.len()).map(|t| centered_ma7(x, t)).collect()
}

/// `(current - previous) / previous`; undefined when `previous` is not
/// positive.
pub fn ma_growth_rate(previous: f64, current: f64) -> Option<f64> {
    (previous > 0.0).then(|| (current - previous) / previous)
}

/// Growth of a moving-average vector aligned with it; entry `t` compares
/// `ma[t]` with `ma[t-1]`.
pub fn growth_series(ma: &[Option<f64>]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(ma.len());
    for t in 0..ma.len() {
        out.push(match (t.checked_sub(1).and_then(|p| ma[p]), ma[t]) {
            (Some(prev), Some(cur)) => ma_growth_rate(prev, cur),
            _ => None,
        });
    }
    out
}

/// Squared deviation plus one, per million people: the quantity whose log
/// is the smoothness outcome.
pub fn deviation_per_million(obs: f64, ma: f64, pop_millions: f64) -> f64 {
    let dev = obs - ma;
    (dev * dev + 1.0) / pop_millions
}

/// `ln(((obs - ma)^2 + 1) / pop_millions)`.
pub fn smoothness_depvar(obs: f64, ma: f64, pop_millions: f64) -> f64 {
    deviation_per_million(obs, ma, pop_millions).ln()
}

/// Country-level summary: the log of the mean of the per-day
/// [`deviation_per_million`] over `dates` (the mean is taken before the log).
///
/// `daily` and `ma` are aligned; only indices in `days` with a defined moving
/// average contribute. Returns `None` when nothing contributes.
pub fn country_mean_log_deviation(
    daily: &[f64],
    ma: &[Option<f64>],
    pop_millions: f64,
    days: std::ops::Range<usize>,
) -> Option<f64> {
    let (sum, n) = days
        .filter_map(|t| ma[t].map(|m| deviation_per_million(daily[t], m, pop_millions)))
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| (sum / n as f64).ln())
}
