use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bounds of the min-max target map onto [0.1, 0.9].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub x_min: f64,
    pub x_max: f64,
}

impl NormalizationSpec {
    pub fn new(x_min: f64, x_max: f64) -> Result<Self> {
        let spec = Self { x_min, x_max };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::Normalization(format!(
                "need x_min < x_max, got ({}, {})",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    /// `0.8·(x − x_min)/(x_max − x_min) + 0.1`
    pub fn apply(&self, x: f64) -> f64 {
        0.8 * (x - self.x_min) / (self.x_max - self.x_min) + 0.1
    }

    pub fn invert(&self, y: f64) -> f64 {
        (y - 0.1) / 0.8 * (self.x_max - self.x_min) + self.x_min
    }
}

/// Min-max map of `x` onto [0.1, 0.9].
pub fn dminmax(x: f64, spec: &NormalizationSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.apply(x))
}

pub fn dminmax_inverse(y: f64, spec: &NormalizationSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.invert(y))
}

/// Per-feature z-score constants fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; constant features get 1.
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Training("cannot standardize zero rows".into()))?;
        let dim = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: row.len(),
                });
            }
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::Dimension {
                expected: self.mean.len(),
                actual: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }
}
