//! Tabular datasets: CSV loading, z-score normalization, min-max scaling and
//! stratified fold assignment.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing header row")]
    MissingHeader,
    #[error("label column {0} not found in header")]
    LabelColumnNotFound(String),
    #[error("row {row}, column {column} ({name}): cannot parse {value:?} as a finite number")]
    BadCell {
        row: usize,
        column: usize,
        name: String,
        value: String,
    },
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("need at least 2 records, found {0}")]
    TooFewRecords(usize),
    #[error("need at least 1 attribute")]
    NoAttributes,
    #[error("duplicate attribute name {0:?}")]
    DuplicateAttribute(String),
    #[error("{labels} labels for {rows} feature rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("{names} attribute names for {cols} feature columns")]
    NameMismatch { names: usize, cols: usize },
    #[error("non-finite value at record {row}, attribute {column}")]
    NonFinite { row: usize, column: usize },
    #[error("dataset is already z-score normalized")]
    AlreadyNormalized,
    #[error("empty vector")]
    Empty,
    #[error("n_folds must be at least 1")]
    ZeroFolds,
    #[error("class {class:?} has {count} records, fewer than {n_folds} folds")]
    ClassTooSmall {
        class: String,
        count: usize,
        n_folds: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    Zscored,
}

/// Which CSV column carries the class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl LabelColumn {
    /// Numeric strings select by zero-based index, anything else by header name.
    pub fn parse(spec: &str) -> Self {
        match spec.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(spec.to_string()),
        }
    }
}

/// Records × attributes feature matrix with opaque string labels.
///
/// Immutable after construction; every transform returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    id: String,
    features: DMatrix<f64>,
    labels: Vec<String>,
    attr_names: Vec<String>,
    label_name: String,
    normalization: Normalization,
}

impl Dataset {
    pub fn new(
        id: impl Into<String>,
        features: DMatrix<f64>,
        labels: Vec<String>,
        attr_names: Vec<String>,
        label_name: impl Into<String>,
    ) -> Result<Self, DatasetError> {
        if features.nrows() < 2 {
            return Err(DatasetError::TooFewRecords(features.nrows()));
        }
        if features.ncols() < 1 {
            return Err(DatasetError::NoAttributes);
        }
        if labels.len() != features.nrows() {
            return Err(DatasetError::LabelMismatch {
                labels: labels.len(),
                rows: features.nrows(),
            });
        }
        if attr_names.len() != features.ncols() {
            return Err(DatasetError::NameMismatch {
                names: attr_names.len(),
                cols: features.ncols(),
            });
        }
        let mut seen = HashSet::new();
        for name in &attr_names {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateAttribute(name.clone()));
            }
        }
        for c in 0..features.ncols() {
            for r in 0..features.nrows() {
                if !features[(r, c)].is_finite() {
                    return Err(DatasetError::NonFinite { row: r, column: c });
                }
            }
        }
        Ok(Self {
            id: id.into(),
            features,
            labels,
            attr_names,
            label_name: label_name.into(),
            normalization: Normalization::Raw,
        })
    }

    /// Builds a dataset with generated attribute names `x0..x{d-1}`.
    pub fn from_rows(
        id: impl Into<String>,
        rows: &[Vec<f64>],
        labels: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(DatasetError::RaggedRow {
                    row: i,
                    found: r.len(),
                    expected: d,
                });
            }
        }
        let features = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let names = (0..d).map(|j| format!("x{j}")).collect();
        Self::new(id, features, labels, names, "class")
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn attr_names(&self) -> &[String] {
        &self.attr_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn n_records(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_attrs(&self) -> usize {
        self.features.ncols()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.features.column(j).iter().copied().collect()
    }

    /// Same labels and metadata, new feature matrix of identical shape.
    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Self, DatasetError> {
        let mut out = Self::new(
            self.id.clone(),
            features,
            self.labels.clone(),
            self.attr_names.clone(),
            self.label_name.clone(),
        )?;
        out.normalization = self.normalization;
        Ok(out)
    }

    /// Distinct labels in sorted order; class index = position in this list.
    pub fn classes(&self) -> Vec<String> {
        let mut c: Vec<String> = self.labels.to_vec();
        c.sort();
        c.dedup();
        c
    }

    pub fn zscore_normalize(&self) -> Result<Self, DatasetError> {
        zscore_normalize(self)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        write_matrix_csv(writer, &self.attr_names, &self.label_name, &self.features, &self.labels)
    }
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(file, label, id)
}

pub fn read_csv<R: Read>(
    reader: R,
    label: &LabelColumn,
    id: impl Into<String>,
) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(DatasetError::MissingHeader);
    }
    let label_idx = match label {
        LabelColumn::Name(n) => header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| DatasetError::LabelColumnNotFound(n.clone()))?,
        LabelColumn::Index(i) if *i < header.len() => *i,
        LabelColumn::Index(i) => return Err(DatasetError::LabelColumnNotFound(i.to_string())),
        LabelColumn::Last => header.len() - 1,
    };
    let attr_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if attr_names.is_empty() {
        return Err(DatasetError::NoAttributes);
    }
    let mut seen = HashSet::new();
    for name in &attr_names {
        if !seen.insert(name.as_str()) {
            return Err(DatasetError::DuplicateAttribute(name.clone()));
        }
    }

    let d = attr_names.len();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        // data rows are reported 1-based, counting the header as row 0
        let row = r + 1;
        if rec.len() != header.len() {
            return Err(DatasetError::RaggedRow {
                row,
                found: rec.len(),
                expected: header.len(),
            });
        }
        for (c, cell) in rec.iter().enumerate() {
            if c == label_idx {
                labels.push(cell.to_string());
                continue;
            }
            let v = cell
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::BadCell {
                    row,
                    column: c,
                    name: header[c].clone(),
                    value: cell.to_string(),
                })?;
            values.push(v);
        }
    }
    let n = labels.len();
    if n < 2 {
        return Err(DatasetError::TooFewRecords(n));
    }
    let features = DMatrix::from_row_slice(n, d, &values);
    Dataset::new(id, features, labels, attr_names, header[label_idx].clone())
}

/// Writes features (shortest round-trip float formatting) with the label as the last column.
pub fn write_matrix_csv<W: Write>(
    writer: W,
    attr_names: &[String],
    label_name: &str,
    features: &DMatrix<f64>,
    labels: &[String],
) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = attr_names.iter().map(String::as_str).collect();
    header.push(label_name);
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(features.ncols() + 1);
    for (r, label) in features.row_iter().zip(labels) {
        row.clear();
        row.extend(r.iter().map(|v| v.to_string()));
        row.push(label.clone());
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| DatasetError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

pub(crate) fn mean_and_popstd<'a>(v: impl IntoIterator<Item = &'a f64> + Clone) -> (f64, f64) {
    let n = v.clone().into_iter().count() as f64;
    let mean = v.clone().into_iter().sum::<f64>() / n;
    let var = v.into_iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-column `(x - mean) / popstd`; constant columns become zeros.
pub fn zscore_normalize(d: &Dataset) -> Result<Dataset, DatasetError> {
    if d.normalization == Normalization::Zscored {
        return Err(DatasetError::AlreadyNormalized);
    }
    let mut out = d.clone();
    zscore_columns(&mut out.features);
    out.normalization = Normalization::Zscored;
    Ok(out)
}

pub(crate) fn zscore_columns(m: &mut DMatrix<f64>) {
    for mut col in m.column_iter_mut() {
        let (mean, std) = mean_and_popstd(col.as_slice());
        if std <= f64::EPSILON * mean.abs().max(1.0) {
            col.fill(0.0);
        } else {
            col.apply(|x| *x = (*x - mean) / std);
        }
    }
}

/// Affine map onto [0, 1]; a constant vector maps to all 0.5.
pub fn minmax_to_unit(v: &[f64]) -> Result<Vec<f64>, DatasetError> {
    if v.is_empty() {
        return Err(DatasetError::Empty);
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(DatasetError::NonFinite { row: i, column: 0 });
    }
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi == lo {
        return Ok(vec![0.5; v.len()]);
    }
    let range = hi - lo;
    Ok(v.iter()
        .map(|&x| {
            if x == hi {
                1.0
            } else {
                (x - lo) / range
            }
        })
        .collect())
}

/// Fold index per record; stratified by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub fold_assignments: Vec<usize>,
    pub n_folds: usize,
    pub seed: u64,
}

impl SplitPlan {
    pub fn train_test(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_folds];
        for &f in &self.fold_assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffles each class with a seeded RNG and deals its records round-robin
/// over the folds, continuing the deal where the previous class stopped.
pub fn stratified_folds(d: &Dataset, n_folds: usize, seed: u64) -> Result<SplitPlan, DatasetError> {
    stratified_folds_for_labels(d.labels(), n_folds, seed)
}

pub fn stratified_folds_for_labels(
    labels: &[String],
    n_folds: usize,
    seed: u64,
) -> Result<SplitPlan, DatasetError> {
    if n_folds == 0 {
        return Err(DatasetError::ZeroFolds);
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    for (class, members) in &by_class {
        if members.len() < n_folds {
            return Err(DatasetError::ClassTooSmall {
                class: class.to_string(),
                count: members.len(),
                n_folds,
            });
        }
    }
    let mut rng = rng::seeded(seed);
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignments[i] = next;
            next = (next + 1) % n_folds;
        }
    }
    Ok(SplitPlan {
        fold_assignments: assignments,
        n_folds,
        seed,
    })
}
