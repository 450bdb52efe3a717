//! Tabular datasets: CSV loading, feature ranges and data diagnostics.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` objects by `m` numeric features, stored row-major.
///
/// Missing cells are flagged in a mask of the same shape; their numeric
/// payload is stored as `0.0` and never read by any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    m: usize,
    values: Vec<f64>,
    missing: Vec<bool>,
    labels: Option<Vec<String>>,
    label_name: Option<String>,
    feature_names: Option<Vec<String>>,
}

/// Selects the label column of a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    /// Zero-based column position.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// `None` detects a header: the first row is one if any of its feature
    /// cells is neither a number nor the missing token.
    pub has_header: Option<bool>,
    pub label_column: Option<ColumnSelector>,
    pub missing_token: String,
}

/// Observed per-feature extent, with the normalizing range used by the
/// dissimilarity computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeVector {
    /// Observed minimum; `NaN` when the feature has no observed value.
    pub min: Vec<f64>,
    /// Observed maximum; `NaN` when the feature has no observed value.
    pub max: Vec<f64>,
    /// `max - min`, or the override when one was given.
    pub range: Vec<f64>,
}

impl RangeVector {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Diagnostic {
    FeatureAllMissing { feature: usize },
    ConstantFeature { feature: usize },
    ObjectAllMissing { object: usize },
    DuplicateObject { object: usize, first: usize },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::FeatureAllMissing { feature } => {
                write!(f, "feature {} is entirely missing", feature + 1)
            }
            Diagnostic::ConstantFeature { feature } => {
                write!(f, "feature {} is constant", feature + 1)
            }
            Diagnostic::ObjectAllMissing { object } => {
                write!(f, "object {} is entirely missing", object + 1)
            }
            Diagnostic::DuplicateObject { object, first } => {
                write!(f, "object {} duplicates object {}", object + 1, first + 1)
            }
        }
    }
}

impl Dataset {
    /// Builds a complete dataset (no missing cells) from rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_optional_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Some).collect())
                .collect(),
        )
    }

    /// Builds a dataset where `None` marks a missing cell.
    pub fn from_optional_rows(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("no objects"));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::Empty("no features"));
        }
        let mut values = Vec::with_capacity(n * m);
        let mut missing = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: m,
                    found: row.len(),
                });
            }
            for (f, cell) in row.into_iter().enumerate() {
                match cell {
                    Some(v) if v.is_finite() => {
                        values.push(v);
                        missing.push(false);
                    }
                    Some(v) => {
                        return Err(Error::Parse {
                            row: i + 1,
                            column: f + 1,
                            value: v.to_string(),
                        })
                    }
                    None => {
                        values.push(0.0);
                        missing.push(true);
                    }
                }
            }
        }
        Ok(Self {
            n,
            m,
            values,
            missing,
            labels: None,
            label_name: None,
            feature_names: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                left: self.n,
                right: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Like [`Dataset::with_labels`], also recording the label column header.
    pub fn with_named_labels(self, labels: Vec<String>, name: &str) -> Result<Self> {
        let mut d = self.with_labels(labels)?;
        d.label_name = Some(name.to_owned());
        Ok(d)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.m {
            return Err(Error::LengthMismatch {
                left: self.m,
                right: names.len(),
            });
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file, options)
    }

    pub fn from_csv_reader<R: Read>(reader: R, options: &LoadOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(records.len() + 1, |p| p.line() as usize);
            records.push((line, record));
        }
        if records.is_empty() {
            return Err(Error::Empty("no rows"));
        }

        let width = records[0].1.len();
        for (line, rec) in &records {
            if rec.len() != width {
                return Err(Error::RaggedRow {
                    row: *line,
                    expected: width,
                    found: rec.len(),
                });
            }
        }

        let token = options.missing_token.as_str();
        let is_cell_numeric = |s: &str| s == token || s.parse::<f64>().is_ok_and(f64::is_finite);

        let named_label = matches!(options.label_column, Some(ColumnSelector::Name(_)));
        let index_label = match &options.label_column {
            Some(ColumnSelector::Index(i)) => {
                if *i >= width {
                    return Err(Error::LabelColumn(format!(
                        "{} (file has {width} columns)",
                        i + 1
                    )));
                }
                Some(*i)
            }
            _ => None,
        };
        let has_header = match options.has_header {
            Some(h) => h,
            None if named_label => true,
            None => records[0]
                .1
                .iter()
                .enumerate()
                .any(|(c, s)| Some(c) != index_label && !is_cell_numeric(s)),
        };

        let header: Option<Vec<String>> = if has_header {
            Some(records.remove(0).1.iter().map(str::to_owned).collect())
        } else {
            None
        };

        let label_idx = match &options.label_column {
            None => None,
            Some(ColumnSelector::Index(i)) => Some(*i),
            Some(ColumnSelector::Name(name)) => {
                let header = header
                    .as_ref()
                    .ok_or_else(|| Error::LabelColumn(format!("{name:?} (no header row)")))?;
                Some(
                    header
                        .iter()
                        .position(|h| h == name)
                        .ok_or_else(|| Error::LabelColumn(format!("{name:?}")))?,
                )
            }
        };

        let m = width - usize::from(label_idx.is_some());
        if m == 0 {
            return Err(Error::Empty("no feature columns"));
        }
        if records.is_empty() {
            return Err(Error::Empty("no data rows"));
        }

        let n = records.len();
        let mut values = Vec::with_capacity(n * m);
        let mut missing = Vec::with_capacity(n * m);
        let mut labels = label_idx.map(|_| Vec::with_capacity(n));
        for (line, rec) in &records {
            for (c, cell) in rec.iter().enumerate() {
                if Some(c) == label_idx {
                    labels.as_mut().expect("label vector").push(cell.to_owned());
                    continue;
                }
                if cell == token {
                    values.push(0.0);
                    missing.push(true);
                    continue;
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        values.push(v);
                        missing.push(false);
                    }
                    _ => {
                        return Err(Error::Parse {
                            row: *line,
                            column: c + 1,
                            value: cell.to_owned(),
                        })
                    }
                }
            }
        }

        let (feature_names, label_name) = match header {
            Some(h) => {
                let label_name = label_idx.map(|i| h[i].clone());
                let names = h
                    .into_iter()
                    .enumerate()
                    .filter(|(c, _)| Some(*c) != label_idx)
                    .map(|(_, s)| s)
                    .collect();
                (Some(names), label_name)
            }
            None => (None, None),
        };

        Ok(Self {
            n,
            m,
            values,
            missing,
            labels,
            label_name,
            feature_names,
        })
    }

    /// Writes features, then the label column (if any) last. A header row is
    /// written when feature names are known.
    pub fn write_csv<W: Write>(&self, writer: W, missing_token: &str) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(writer);
        if let Some(names) = &self.feature_names {
            let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
            if self.labels.is_some() {
                header.push(self.label_name.as_deref().unwrap_or("label"));
            }
            wtr.write_record(&header)?;
        }
        for i in 0..self.n {
            let mut rec: Vec<String> = (0..self.m)
                .map(|f| match self.value(i, f) {
                    Some(v) => v.to_string(),
                    None => missing_token.to_owned(),
                })
                .collect();
            if let Some(labels) = &self.labels {
                rec.push(labels[i].clone());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The observed value, or `None` when the cell is missing.
    #[inline]
    pub fn value(&self, object: usize, feature: usize) -> Option<f64> {
        let idx = object * self.m + feature;
        (!self.missing[idx]).then(|| self.values[idx])
    }

    #[inline]
    pub fn is_missing(&self, object: usize, feature: usize) -> bool {
        self.missing[object * self.m + feature]
    }

    /// Raw row payload. Missing cells read as `0.0`; check the mask first.
    #[inline]
    pub fn row(&self, object: usize) -> &[f64] {
        &self.values[object * self.m..(object + 1) * self.m]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&b| b)
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label_name(&self) -> Option<&str> {
        self.label_name.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Range of every feature over its observed values, optionally replaced
    /// per feature by `overrides` (zero-based feature index to range).
    pub fn feature_ranges(&self, overrides: &BTreeMap<usize, f64>) -> Result<RangeVector> {
        for (&feature, &value) in overrides {
            if feature >= self.m {
                return Err(Error::IndexOutOfRange {
                    what: "features",
                    index: feature,
                    size: self.m,
                });
            }
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidOverride { feature, value });
            }
        }
        let mut min = vec![f64::NAN; self.m];
        let mut max = vec![f64::NAN; self.m];
        for i in 0..self.n {
            for f in 0..self.m {
                if let Some(v) = self.value(i, f) {
                    if min[f].is_nan() || v < min[f] {
                        min[f] = v;
                    }
                    if max[f].is_nan() || v > max[f] {
                        max[f] = v;
                    }
                }
            }
        }
        let range = (0..self.m)
            .map(|f| match overrides.get(&f) {
                Some(&r) => r,
                None if min[f].is_nan() => 0.0,
                None => max[f] - min[f],
            })
            .collect();
        Ok(RangeVector { min, max, range })
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for f in 0..self.m {
            let mut observed = (0..self.n).filter_map(|i| self.value(i, f));
            match observed.next() {
                None => out.push(Diagnostic::FeatureAllMissing { feature: f }),
                Some(first) => {
                    if observed.all(|v| v == first) {
                        out.push(Diagnostic::ConstantFeature { feature: f });
                    }
                }
            }
        }
        let mut seen: HashMap<Vec<Option<u64>>, usize> = HashMap::new();
        for i in 0..self.n {
            if (0..self.m).all(|f| self.is_missing(i, f)) {
                out.push(Diagnostic::ObjectAllMissing { object: i });
                continue;
            }
            // +0.0 folds -0.0 onto 0.0 so the bit patterns compare as values.
            let key = (0..self.m)
                .map(|f| self.value(i, f).map(|v| (v + 0.0).to_bits()))
                .collect();
            match seen.get(&key) {
                Some(&first) => out.push(Diagnostic::DuplicateObject { object: i, first }),
                None => {
                    seen.insert(key, i);
                }
            }
        }
        out
    }
}
