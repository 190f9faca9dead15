use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::neuralnet::NormalizationSpec;
use crate::{Error, Result};

/// What a percent error is relative to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Span of the target range, `x_max − x_min` (195 km by default).
    #[default]
    Span,
    /// Full line length (200 km by default).
    LineLength,
}

impl Denominator {
    pub fn km(&self, spec: &NormalizationSpec, line_length_km: f64) -> f64 {
        match self {
            Denominator::Span => spec.x_max - spec.x_min,
            Denominator::LineLength => line_length_km,
        }
    }
}

impl fmt::Display for Denominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Denominator::Span => "span",
            Denominator::LineLength => "line_length",
        })
    }
}

impl FromStr for Denominator {
    type Err = Error;

    /// Accepts `span` / `195` and `line_length` / `line` / `200`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "span" | "range" | "195" => Ok(Denominator::Span),
            "line_length" | "line" | "length" | "200" => Ok(Denominator::LineLength),
            other => Err(Error::Config(format!("unknown denominator {other:?}"))),
        }
    }
}

/// `|actual − predicted| / denom · 100`.
pub fn percent_error(actual_km: f64, predicted_km: f64, denom_km: f64) -> Result<f64> {
    if !(denom_km > 0.0) {
        return Err(Error::Config(format!("percent-error denominator must be positive, got {denom_km}")));
    }
    Ok((actual_km - predicted_km).abs() / denom_km * 100.0)
}

/// Mean squared difference after mapping both series into the normalized
/// target range.
pub fn mse_normalized(actual_km: &[f64], predicted_km: &[f64], spec: &NormalizationSpec) -> Result<f64> {
    if actual_km.len() != predicted_km.len() {
        return Err(Error::Dimension {
            expected: actual_km.len(),
            actual: predicted_km.len(),
        });
    }
    if actual_km.is_empty() {
        return Err(Error::Config("mse of an empty series".into()));
    }
    let sum: f64 = actual_km
        .iter()
        .zip(predicted_km)
        .map(|(a, p)| (spec.apply(*a) - spec.apply(*p)).powi(2))
        .sum();
    Ok(sum / actual_km.len() as f64)
}
