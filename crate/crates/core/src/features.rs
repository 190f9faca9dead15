//! Mean / standard-deviation reduction of a normalized canvas.
//!
//! Every region yields its arithmetic mean and population standard
//! deviation. The vector holds all region means first, then all standard
//! deviations, both in region scan order. Sums run in a fixed row-major order
//! so results are bit-stable.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::raster::NormalizedImage;
use crate::{Error, Result};

/// How the canvas is partitioned before reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ReductionMode {
    Global,
    PerRow,
    PerColumn,
    /// `k × k` near-equal tiles.
    Block(usize),
}

impl ReductionMode {
    /// Number of features produced for a `height × width` canvas.
    pub fn feature_len(&self, height: usize, width: usize) -> usize {
        2 * match *self {
            ReductionMode::Global => 1,
            ReductionMode::PerRow => height,
            ReductionMode::PerColumn => width,
            ReductionMode::Block(k) => k * k,
        }
    }

    /// Column names, e.g. `percolumn.mean.17`.
    pub fn descriptor(&self, height: usize, width: usize) -> Vec<String> {
        let regions = self.feature_len(height, width) / 2;
        let tag = self.to_string();
        ["mean", "std"]
            .iter()
            .flat_map(|stat| {
                let tag = tag.clone();
                (0..regions).map(move |k| format!("{tag}.{stat}.{k}"))
            })
            .collect()
    }
}

impl fmt::Display for ReductionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionMode::Global => write!(f, "global"),
            ReductionMode::PerRow => write!(f, "perrow"),
            ReductionMode::PerColumn => write!(f, "percolumn"),
            ReductionMode::Block(k) => write!(f, "block{k}"),
        }
    }
}

impl FromStr for ReductionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "global" => Ok(ReductionMode::Global),
            "perrow" | "per_row" | "row" => Ok(ReductionMode::PerRow),
            "percolumn" | "per_column" | "column" => Ok(ReductionMode::PerColumn),
            _ => {
                let k = lower
                    .strip_prefix("block")
                    .map(|rest| rest.trim_start_matches(['(', '_', ':']).trim_end_matches(')'))
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown reduction mode {s:?}")))?;
                if k == 0 {
                    return Err(Error::Config("block grid side must be at least 1".into()));
                }
                Ok(ReductionMode::Block(k))
            }
        }
    }
}

impl From<ReductionMode> for String {
    fn from(m: ReductionMode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for ReductionMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub mode: ReductionMode,
}

/// Half-open index ranges splitting `len` into `parts` near-equal pieces.
fn split_ranges(len: usize, parts: usize) -> Vec<(usize, usize)> {
    (0..parts)
        .map(|i| (i * len / parts, (i + 1) * len / parts))
        .collect()
}

/// Mean and population standard deviation of a rectangular region.
fn region_stats(img: &NormalizedImage, rows: (usize, usize), cols: (usize, usize)) -> (f64, f64) {
    let n = ((rows.1 - rows.0) * (cols.1 - cols.0)) as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    for r in rows.0..rows.1 {
        for c in cols.0..cols.1 {
            sum += img.get(r, c);
        }
    }
    let mean = sum / n;
    let mut sq = 0.0;
    for r in rows.0..rows.1 {
        for c in cols.0..cols.1 {
            let d = img.get(r, c) - mean;
            sq += d * d;
        }
    }
    (mean, (sq / n).sqrt())
}

/// Reduce the canvas to `[means..., stds...]` over the regions of `mode`.
pub fn reduce(img: &NormalizedImage, mode: ReductionMode) -> FeatureVector {
    let (h, w) = (img.height, img.width);
    let regions: Vec<((usize, usize), (usize, usize))> = match mode {
        ReductionMode::Global => vec![((0, h), (0, w))],
        ReductionMode::PerRow => (0..h).map(|r| ((r, r + 1), (0, w))).collect(),
        ReductionMode::PerColumn => (0..w).map(|c| ((0, h), (c, c + 1))).collect(),
        ReductionMode::Block(k) => {
            let k = k.max(1);
            let rows = split_ranges(h, k);
            let cols = split_ranges(w, k);
            rows.iter()
                .flat_map(|&rr| cols.iter().map(move |&cc| (rr, cc)))
                .collect()
        }
    };
    let stats: Vec<(f64, f64)> = regions
        .iter()
        .map(|&(rows, cols)| region_stats(img, rows, cols))
        .collect();
    let mut values = Vec::with_capacity(2 * stats.len());
    values.extend(stats.iter().map(|s| s.0));
    values.extend(stats.iter().map(|s| s.1));
    FeatureVector { values, mode }
}
