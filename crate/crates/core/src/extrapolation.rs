//! Linear trend fits over yearly delta series and the year at which a fitted
//! line reaches a given level.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrendError {
    #[error("trend fit needs at least two distinct years, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite value {value} at year {year}")]
    NonFinite { year: i32, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrendFit {
    pub slope: f64,
    pub intercept: f64,
    /// 1 for a series the line reproduces exactly, including a constant one.
    pub r2: f64,
    pub n: usize,
    pub first_year: i32,
    pub last_year: i32,
}

impl TrendFit {
    pub fn predict(&self, year: f64) -> f64 {
        self.intercept + self.slope * year
    }
}

/// Ordinary least squares of value on year. Years are centered before the
/// fit so large calendar years do not cost precision.
pub fn fit_trend(series: &BTreeMap<i32, f64>) -> Result<TrendFit, TrendError> {
    if let Some((&year, &value)) = series.iter().find(|(_, v)| !v.is_finite()) {
        return Err(TrendError::NonFinite { year, value });
    }
    let n = series.len();
    if n < 2 {
        return Err(TrendError::TooFewPoints(n));
    }
    let xm = series.keys().map(|&y| y as f64).sum::<f64>() / n as f64;
    let ym = series.values().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&y, &v) in series {
        let dx = y as f64 - xm;
        let dy = v - ym;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let first = *series.values().next().expect("n >= 2");
    let constant = series.values().all(|&v| v == first);
    let slope = if constant { 0.0 } else { sxy / sxx };
    let ym = if constant { first } else { ym };
    let intercept = ym - slope * xm;
    let sse: f64 = series
        .iter()
        .map(|(&y, &v)| {
            let e = v - (ym + slope * (y as f64 - xm));
            e * e
        })
        .sum();
    let r2 = if !constant && syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(TrendFit {
        slope,
        intercept,
        r2,
        n,
        first_year: *series.keys().next().expect("n >= 2"),
        last_year: *series.keys().next_back().expect("n >= 2"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoCrossing {
    /// Zero slope: the line never reaches the level, or is on it everywhere.
    Flat,
    /// The line reaches the level inside the observed range.
    AlreadyCrossed,
    /// The line moves away from the level after the observed range.
    Diverging,
}

impl NoCrossing {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Flat => "flat",
            Self::AlreadyCrossed => "already_crossed",
            Self::Diverging => "diverging",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    /// Fractional year at or after the last observed year.
    Year(f64),
    None(NoCrossing),
}

/// Year at which the fitted line reaches `level`, when that happens after
/// the last observed year or later.
pub fn predict_crossing(fit: &TrendFit, level: f64) -> Crossing {
    if fit.slope == 0.0 {
        return Crossing::None(NoCrossing::Flat);
    }
    let year = (level - fit.intercept) / fit.slope;
    if year >= fit.last_year as f64 {
        Crossing::Year(year)
    } else if year >= fit.first_year as f64 {
        Crossing::None(NoCrossing::AlreadyCrossed)
    } else {
        Crossing::None(NoCrossing::Diverging)
    }
}
