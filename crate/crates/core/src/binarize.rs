//! Threshold dummy encoding of continuous features.
//!
//! Each feature is replaced by indicators `1[x <= theta]` (or `1[x >= theta]`)
//! for its distinct observed values, so a sparse linear model over the dummies
//! is an additive model over the original features.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{DesignMatrix, Error, Result};

/// Comparison used by every indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Direction {
    #[default]
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl Direction {
    pub fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Direction::AtMost => value <= threshold,
            Direction::AtLeast => value >= threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "<=" | "le" | "at-most" => Ok(Direction::AtMost),
            ">=" | "ge" | "at-least" => Ok(Direction::AtLeast),
            other => Err(Error::InvalidConfig(format!("unknown direction `{other}`"))),
        }
    }
}

/// Numeric values of an indicator that holds / does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// 1 / 0.
    #[default]
    ZeroOne,
    /// +1 / -1, as the exponential loss requires.
    PlusMinusOne,
}

impl Encoding {
    pub fn encode(self, holds: bool) -> f64 {
        match (self, holds) {
            (_, true) => 1.0,
            (Encoding::ZeroOne, false) => 0.0,
            (Encoding::PlusMinusOne, false) => -1.0,
        }
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "01" | "zero-one" | "zero_one" => Ok(Encoding::ZeroOne),
            "pm1" | "plus-minus-one" | "plus_minus_one" => Ok(Encoding::PlusMinusOne),
            other => Err(Error::InvalidConfig(format!("unknown encoding `{other}`"))),
        }
    }
}

/// Thresholds and output columns generated for one source feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureThresholds {
    pub feature: String,
    /// Strictly increasing.
    pub thresholds: Vec<f64>,
    /// Output column of each threshold.
    pub columns: Vec<usize>,
}

/// Record of a binarization, sufficient to encode new observations the same way.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMap {
    pub direction: Direction,
    pub encoding: Encoding,
    /// Source features that produced at least one column, in input order.
    pub features: Vec<FeatureThresholds>,
    /// Constant source features, which produce no columns.
    pub dropped: Vec<String>,
}

impl ThresholdMap {
    /// Number of generated columns.
    pub fn width(&self) -> usize {
        self.features.iter().map(|f| f.columns.len()).sum()
    }

    /// Name of the dummy column for `feature` at `threshold`.
    pub fn column_name(&self, feature: &str, threshold: f64) -> String {
        format!("{feature}{}{threshold}", self.direction.symbol())
    }

    /// Generated column names in column order.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); self.width()];
        for f in &self.features {
            for (&t, &c) in f.thresholds.iter().zip(&f.columns) {
                names[c] = self.column_name(&f.feature, t);
            }
        }
        names
    }

    /// Encodes new data that has (at least) the mapped source features.
    pub fn transform(&self, data: &DesignMatrix) -> Result<DesignMatrix> {
        let width = self.width();
        let mut columns = vec![Vec::new(); width];
        for f in &self.features {
            let j = data
                .feature_index(&f.feature)
                .ok_or_else(|| Error::InvalidData(format!("missing feature `{}`", f.feature)))?;
            let source = data.column(j);
            for (&t, &c) in f.thresholds.iter().zip(&f.columns) {
                columns[c] = source.iter().map(|&v| self.encoding.encode(self.direction.holds(v, t))).collect();
            }
        }
        DesignMatrix::from_columns(columns, data.labels().to_vec(), self.column_names())
    }
}

/// Nearest-rank quantiles at levels `k / m`, `k = 1..=m`, deduplicated.
fn capped_thresholds(sorted: &[f64], m: usize) -> Vec<f64> {
    let len = sorted.len();
    let mut out: Vec<f64> = (1..=m)
        .map(|k| {
            let rank = (k * len).div_ceil(m).max(1);
            sorted[rank - 1]
        })
        .collect();
    out.dedup();
    out
}

/// Replaces every feature by threshold indicators at its distinct values, or at
/// `max_thresholds` quantiles when it has more distinct values than that.
pub fn binarize(
    data: &DesignMatrix,
    direction: Direction,
    encoding: Encoding,
    max_thresholds: Option<usize>,
) -> Result<(DesignMatrix, ThresholdMap)> {
    if data.n() == 0 {
        return Err(Error::InvalidData("cannot binarize an empty dataset".into()));
    }
    if max_thresholds == Some(0) {
        return Err(Error::InvalidConfig("max_thresholds must be positive".into()));
    }
    let mut map = ThresholdMap { direction, encoding, features: Vec::new(), dropped: Vec::new() };
    let mut next = 0;
    for (j, name) in data.feature_names().iter().enumerate() {
        let mut sorted = data.column(j).to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        if distinct.len() < 2 {
            map.dropped.push(name.clone());
            continue;
        }
        let thresholds = match max_thresholds {
            Some(m) if m < distinct.len() => capped_thresholds(&sorted, m),
            _ => distinct,
        };
        let columns = (next..next + thresholds.len()).collect();
        next += thresholds.len();
        map.features.push(FeatureThresholds { feature: name.clone(), thresholds, columns });
    }
    let binary = map.transform(data)?;
    Ok((binary, map))
}
