//! Range-normalized mixed-variable dissimilarities.
//!
//! Every feature contributes `|a_f - b_f| / range_f`, gated by an indicator
//! that drops the feature for a pair when either value is missing or, with
//! the zero-zero rule enabled, when both values are exactly zero. The
//! combined dissimilarity aggregates the surviving per-feature terms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, RangeVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombineMode {
    /// `sum(delta * d) / sum(delta)`.
    #[default]
    Mean,
    /// `sqrt(sum((delta * d)^2)) / sum(delta)`.
    RootSumSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityOptions {
    pub mode: CombineMode,
    /// Treat a pair whose values are both exactly zero as not comparable.
    pub zero_zero_skip: bool,
}

impl Default for DissimilarityOptions {
    fn default() -> Self {
        Self {
            mode: CombineMode::Mean,
            zero_zero_skip: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    Feature(usize),
    Combined(CombineMode),
    /// Supplied directly through [`DissimilarityMatrix::from_values`].
    External,
}

/// Symmetric `n x n` matrix with zero diagonal and entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    provenance: Provenance,
    incomparable: Vec<(usize, usize)>,
}

impl DissimilarityMatrix {
    /// Wraps a row-major matrix after checking the matrix invariants.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: values.len(),
            });
        }
        for a in 0..n {
            if values[a * n + a] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {}", a + 1)));
            }
            for b in 0..n {
                let v = values[a * n + b];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({}, {}) = {v} outside [0, 1]",
                        a + 1,
                        b + 1
                    )));
                }
                if v != values[b * n + a] {
                    return Err(Error::InvalidMatrix(format!(
                        "asymmetric at ({}, {})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(Self {
            n,
            values,
            provenance: Provenance::External,
            incomparable: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Pairs `(a, b)`, `a < b`, that shared no comparable feature and were
    /// assigned the maximal dissimilarity 1.
    pub fn incomparable_pairs(&self) -> &[(usize, usize)] {
        &self.incomparable
    }

    /// `n` lines of `n` comma-separated values with 6 decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(self.n * self.n * 9);
        for a in 0..self.n {
            for (b, v) in self.row(a).iter().enumerate() {
                if b > 0 {
                    out.push(',');
                }
                write!(out, "{v:.6}").expect("write to String");
            }
            out.push('\n');
        }
        out
    }
}

/// A single-feature matrix together with the comparability indicator of
/// every pair (row-major, 1 = comparable).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub matrix: DissimilarityMatrix,
    pub delta: Vec<u8>,
}

/// Comparability indicator for feature `f` of objects `a` and `b`.
///
/// Panics if an index is out of range.
pub fn delta(d: &Dataset, a: usize, b: usize, f: usize, zero_zero_skip: bool) -> u8 {
    match (d.value(a, f), d.value(b, f)) {
        (Some(x), Some(y)) if !(zero_zero_skip && x == 0.0 && y == 0.0) => 1,
        _ => 0,
    }
}

/// `|a_f - b_f| / range_f`, capped at 1 (an override below the observed
/// range could otherwise exceed it). Zero for a constant feature or when a
/// value is missing.
pub fn per_feature_distance(
    d: &Dataset,
    a: usize,
    b: usize,
    f: usize,
    ranges: &RangeVector,
) -> f64 {
    let range = ranges.range[f];
    match (d.value(a, f), d.value(b, f)) {
        (Some(x), Some(y)) if range > 0.0 => ((x - y).abs() / range).min(1.0),
        _ => 0.0,
    }
}

fn check_ranges(d: &Dataset, ranges: &RangeVector) -> Result<()> {
    if ranges.len() != d.m() {
        return Err(Error::DimensionMismatch {
            expected: d.m(),
            found: ranges.len(),
        });
    }
    Ok(())
}

pub fn feature_matrix(
    d: &Dataset,
    f: usize,
    ranges: &RangeVector,
    zero_zero_skip: bool,
) -> Result<FeatureMatrix> {
    check_ranges(d, ranges)?;
    if f >= d.m() {
        return Err(Error::IndexOutOfRange {
            what: "features",
            index: f,
            size: d.m(),
        });
    }
    let n = d.n();
    let mut values = vec![0.0; n * n];
    let mut deltas = vec![0u8; n * n];
    for a in 0..n {
        deltas[a * n + a] = delta(d, a, a, f, zero_zero_skip);
        for b in a + 1..n {
            let flag = delta(d, a, b, f, zero_zero_skip);
            let v = if flag == 1 {
                per_feature_distance(d, a, b, f, ranges)
            } else {
                0.0
            };
            values[a * n + b] = v;
            values[b * n + a] = v;
            deltas[a * n + b] = flag;
            deltas[b * n + a] = flag;
        }
    }
    Ok(FeatureMatrix {
        matrix: DissimilarityMatrix {
            n,
            values,
            provenance: Provenance::Feature(f),
            incomparable: Vec::new(),
        },
        delta: deltas,
    })
}

/// Combined dissimilarity of one pair; `None` when no feature is comparable.
pub fn pair_dissimilarity(
    d: &Dataset,
    a: usize,
    b: usize,
    ranges: &RangeVector,
    options: &DissimilarityOptions,
) -> Option<f64> {
    let mut weight = 0u32;
    let mut acc = 0.0;
    for f in 0..d.m() {
        if delta(d, a, b, f, options.zero_zero_skip) == 0 {
            continue;
        }
        let term = per_feature_distance(d, a, b, f, ranges);
        weight += 1;
        acc += match options.mode {
            CombineMode::Mean => term,
            CombineMode::RootSumSquare => term * term,
        };
    }
    if weight == 0 {
        return None;
    }
    let numerator = match options.mode {
        CombineMode::Mean => acc,
        CombineMode::RootSumSquare => acc.sqrt(),
    };
    Some((numerator / f64::from(weight)).clamp(0.0, 1.0))
}

pub fn combined_matrix(
    d: &Dataset,
    ranges: &RangeVector,
    options: &DissimilarityOptions,
) -> Result<DissimilarityMatrix> {
    check_ranges(d, ranges)?;
    let n = d.n();
    let mut values = vec![0.0; n * n];
    let mut incomparable = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let v = pair_dissimilarity(d, a, b, ranges, options).unwrap_or_else(|| {
                incomparable.push((a, b));
                1.0
            });
            values[a * n + b] = v;
            values[b * n + a] = v;
        }
    }
    Ok(DissimilarityMatrix {
        n,
        values,
        provenance: Provenance::Combined(options.mode),
        incomparable,
    })
}
