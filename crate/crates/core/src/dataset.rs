//! Tabular datasets: CSV ingestion with type inference, per-column summary
//! statistics, histograms and normalized numeric views.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            ColumnData::Numeric(v) => v[row].is_none(),
            ColumnData::Categorical(v) => v[row].is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    name: String,
    data: ColumnData,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Numeric(values),
        }
    }

    pub fn categorical(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Column {
            name: name.into(),
            data: ColumnData::Categorical(values),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ColumnKind {
        match self.data {
            ColumnData::Numeric(_) => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    pub fn data(&self) -> &ColumnData {
        &self.data
    }

    pub fn as_numeric(&self) -> Option<&[Option<f64>]> {
        match &self.data {
            ColumnData::Numeric(v) => Some(v),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn as_categorical(&self) -> Option<&[Option<String>]> {
        match &self.data {
            ColumnData::Categorical(v) => Some(v),
            ColumnData::Numeric(_) => None,
        }
    }

    pub fn missing_count(&self) -> usize {
        (0..self.data.len()).filter(|&r| self.data.is_missing(r)).count()
    }

    /// Distinct non-missing category tokens in sorted order.
    pub fn categories(&self) -> Vec<String> {
        let mut cats: Vec<String> = self
            .as_categorical()
            .map(|v| v.iter().flatten().cloned().collect())
            .unwrap_or_default();
        cats.sort();
        cats.dedup();
        cats
    }
}

/// An immutable, typed table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    row_count: usize,
    source_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub minimum: f64,
    pub maximum: f64,
    pub median: f64,
    pub count: usize,
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub attribute: String,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    None,
    Minmax,
    Zscore,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::Minmax => "minmax",
            Normalization::Zscore => "zscore",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "raw" => Ok(Normalization::None),
            "minmax" => Ok(Normalization::Minmax),
            "zscore" => Ok(Normalization::Zscore),
            other => Err(Error::InvalidArgument(format!(
                "unknown normalization '{other}' (expected none, minmax or zscore)"
            ))),
        }
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_missing_marker(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("n/a")
}

/// Accepts `[+-]digits[.digits][(e|E)[+-]digits]`, also `.5` and `5.`.
/// No thousands separators, no `inf`/`nan`.
fn parse_decimal(cell: &str) -> Option<f64> {
    let bytes = cell.as_bytes();
    let mut i = 0;
    if matches!(bytes.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return None;
    }
    if i < bytes.len() && matches!(bytes[i], b'e' | b'E') {
        i += 1;
        if matches!(bytes.get(i), Some(b'+' | b'-')) {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return None;
        }
    }
    if i != bytes.len() {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl Dataset {
    /// Builds a dataset from already-typed columns. The digest covers the
    /// column names, kinds and values.
    pub fn from_columns(columns: Vec<Column>) -> Result<Self> {
        let row_count = columns.first().map_or(0, |c| c.data.len());
        let mut seen = HashMap::new();
        for col in &columns {
            if col.name.is_empty() {
                return Err(Error::InvalidDataset("empty column name".into()));
            }
            if seen.insert(col.name.as_str(), ()).is_some() {
                return Err(Error::InvalidDataset(format!(
                    "duplicate column name '{}'",
                    col.name
                )));
            }
            if col.data.len() != row_count {
                return Err(Error::InvalidDataset(format!(
                    "column '{}' has {} entries, expected {row_count}",
                    col.name,
                    col.data.len()
                )));
            }
        }
        let mut hasher = Sha256::new();
        for col in &columns {
            hasher.update(col.name.as_bytes());
            hasher.update([0, col.kind() as u8]);
            match &col.data {
                ColumnData::Numeric(v) => {
                    for x in v {
                        match x {
                            Some(x) => hasher.update(x.to_le_bytes()),
                            None => hasher.update([0xff]),
                        }
                    }
                }
                ColumnData::Categorical(v) => {
                    for x in v {
                        match x {
                            Some(s) => {
                                hasher.update(s.as_bytes());
                                hasher.update([0]);
                            }
                            None => hasher.update([0xff]),
                        }
                    }
                }
            }
        }
        Ok(Dataset {
            columns,
            row_count,
            source_digest: hex::encode(hasher.finalize()),
        })
    }

    /// Parses comma-delimited, RFC 4180 quoted UTF-8 text whose first record
    /// is the header. A column is numeric iff every non-missing cell is a
    /// decimal literal. Empty cells, `NA` and `N/A` (any case) are missing.
    pub fn load_csv(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Error::InvalidDataset(format!("input is not UTF-8: {e}")))?;
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        if text.trim().is_empty() {
            return Err(Error::InvalidDataset("empty input".into()));
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut records = reader.records();

        let header = match records.next() {
            Some(rec) => rec.map_err(|e| Error::InvalidDataset(e.to_string()))?,
            None => return Err(Error::InvalidDataset("empty input".into())),
        };
        let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
        let mut seen = HashMap::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty header name".into()));
            }
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::InvalidDataset(format!(
                    "duplicate header name '{name}'"
                )));
            }
        }

        let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); names.len()];
        for (row, rec) in records.enumerate() {
            let rec = rec.map_err(|e| Error::InvalidDataset(e.to_string()))?;
            if rec.len() != names.len() {
                return Err(Error::MalformedRow {
                    row,
                    expected: names.len(),
                    found: rec.len(),
                });
            }
            for (col, cell) in rec.iter().enumerate() {
                let cell = cell.trim();
                cells[col].push((!is_missing_marker(cell)).then(|| cell.to_string()));
            }
        }
        if cells.first().is_none_or(|c| c.is_empty()) {
            return Err(Error::InvalidDataset("no data rows".into()));
        }

        let columns = names
            .into_iter()
            .zip(cells)
            .map(|(name, raw)| {
                let parsed: Option<Vec<Option<f64>>> = raw
                    .iter()
                    .map(|c| match c {
                        None => Some(None),
                        Some(s) => parse_decimal(s).map(Some),
                    })
                    .collect();
                match parsed {
                    Some(values) => Column::numeric(name, values),
                    None => Column::categorical(name, raw),
                }
            })
            .collect::<Vec<_>>();

        let mut ds = Dataset::from_columns(columns)?;
        ds.source_digest = digest_bytes(bytes);
        Ok(ds)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    }

    pub fn numeric(&self, name: &str) -> Result<&[Option<f64>]> {
        self.column(name)?.as_numeric().ok_or(Error::TypeMismatch {
            attribute: name.to_string(),
            expected: "numeric",
        })
    }

    pub fn categorical(&self, name: &str) -> Result<&[Option<String>]> {
        self.column(name)?.as_categorical().ok_or(Error::TypeMismatch {
            attribute: name.to_string(),
            expected: "categorical",
        })
    }

    pub fn numeric_attributes(&self) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(|c| c.kind() == ColumnKind::Numeric)
            .map(|c| c.name.as_str())
    }

    pub fn categorical_attributes(&self) -> impl Iterator<Item = &str> {
        self.columns
            .iter()
            .filter(|c| c.kind() == ColumnKind::Categorical)
            .map(|c| c.name.as_str())
    }

    /// Min, max and median over the non-missing values of `attribute`,
    /// optionally restricted to `subset` row indices.
    pub fn column_stats(&self, attribute: &str, subset: Option<&[usize]>) -> Result<ColumnStats> {
        let values = self.numeric(attribute)?;
        let (present, missing) = match subset {
            Some(rows) => {
                let mut present = Vec::with_capacity(rows.len());
                let mut missing = 0;
                for &r in rows {
                    match values.get(r) {
                        Some(Some(v)) => present.push(*v),
                        Some(None) => missing += 1,
                        None => {
                            return Err(Error::InvalidArgument(format!(
                                "row index {r} out of range (row count {})",
                                self.row_count
                            )))
                        }
                    }
                }
                (present, missing)
            }
            None => {
                let present: Vec<f64> = values.iter().flatten().copied().collect();
                let missing = values.len() - present.len();
                (present, missing)
            }
        };
        summarize(&present, missing).ok_or_else(|| Error::EmptyColumn(attribute.to_string()))
    }

    /// Equal-width histogram over `[min, max]`; bins are half-open except the
    /// last. A constant attribute yields a single bin.
    pub fn histogram(&self, attribute: &str, bins: usize) -> Result<Histogram> {
        if bins == 0 {
            return Err(Error::InvalidArgument("bins must be positive".into()));
        }
        let values: Vec<f64> = self.numeric(attribute)?.iter().flatten().copied().collect();
        let (lo, hi) = min_max(&values).ok_or_else(|| Error::EmptyColumn(attribute.to_string()))?;

        if lo == hi {
            return Ok(Histogram {
                attribute: attribute.to_string(),
                bin_edges: vec![lo, hi],
                counts: vec![values.len()],
            });
        }

        let width = hi - lo;
        let mut edges: Vec<f64> = (0..bins)
            .map(|i| lo + width * (i as f64) / (bins as f64))
            .collect();
        edges.push(hi);
        // Extremely narrow ranges can collapse neighbouring edges.
        edges.dedup();
        let bins = edges.len() - 1;

        let mut counts = vec![0usize; bins];
        for &v in &values {
            let idx = edges.partition_point(|&e| e <= v).saturating_sub(1).min(bins - 1);
            counts[idx] += 1;
        }
        Ok(Histogram {
            attribute: attribute.to_string(),
            bin_edges: edges,
            counts,
        })
    }

    /// Returns a copy where each listed numeric attribute has been rescaled.
    /// Constant columns map to 0.5 (minmax) or 0 (zscore).
    pub fn normalize_view(&self, attributes: &[&str], mode: Normalization) -> Result<Dataset> {
        for attr in attributes {
            self.numeric(attr)?;
        }
        if mode == Normalization::None {
            return Ok(self.clone());
        }
        let columns = self
            .columns
            .iter()
            .map(|col| match &col.data {
                ColumnData::Numeric(values) if attributes.contains(&col.name.as_str()) => {
                    Column::numeric(col.name.clone(), normalize_values(values, mode))
                }
                _ => col.clone(),
            })
            .collect();
        Ok(Dataset {
            columns,
            row_count: self.row_count,
            source_digest: self.source_digest.clone(),
        })
    }
}

pub(crate) fn normalize_values(values: &[Option<f64>], mode: Normalization) -> Vec<Option<f64>> {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    let Some((lo, hi)) = min_max(&present) else {
        return values.to_vec();
    };
    match mode {
        Normalization::None => values.to_vec(),
        Normalization::Minmax => {
            let range = hi - lo;
            values
                .iter()
                .map(|v| v.map(|x| if range > 0.0 { (x - lo) / range } else { 0.5 }))
                .collect()
        }
        Normalization::Zscore => {
            let n = present.len() as f64;
            let mean = present.iter().sum::<f64>() / n;
            let var = present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            values
                .iter()
                .map(|v| v.map(|x| if lo < hi && sd > 0.0 { (x - mean) / sd } else { 0.0 }))
                .collect()
        }
    }
}

pub(crate) fn min_max(values: &[f64]) -> Option<(f64, f64)> {
    values.iter().fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

pub(crate) fn summarize(values: &[f64], missing: usize) -> Option<ColumnStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Some(ColumnStats {
        minimum: sorted[0],
        maximum: sorted[n - 1],
        median,
        count: n,
        missing,
    })
}
