//! Labeled feature matrices, the feature CSV format and per-class train/test splits.
//!
//! Feature CSV: a header line `label,f0,f1,...`, then one sample per line with the class
//! label (any non-empty string without commas) followed by the feature values. Labels are
//! mapped to class indices `0..C` in order of first appearance.
//!
//! Splits shuffle each class independently with a ChaCha8 stream seeded from
//! `(seed, class)` and take the first `train_per_class` rows for training and the next
//! `test_per_class` for testing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Entries in `[-NONNEG_CLAMP_TOLERANCE, 0)` may be clamped to zero.
pub const NONNEG_CLAMP_TOLERANCE: f64 = 1e-9;

/// N samples of dimension M with labels in `0..C`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Matrix,
    labels: Vec<usize>,
    class_names: Vec<String>,
    class_index: Vec<Vec<usize>>,
}

impl LabeledDataset {
    /// Builds a dataset with class names `"0"`, `"1"`, ...
    pub fn new(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let c = labels.iter().max().map_or(0, |m| m + 1);
        let names = (0..c).map(|j| j.to_string()).collect();
        Self::with_class_names(features, labels, names)
    }

    pub fn with_class_names(
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::invalid(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.rows()
            )));
        }
        let c = class_names.len();
        let mut class_index = vec![Vec::new(); c];
        for (i, &l) in labels.iter().enumerate() {
            if l >= c {
                return Err(Error::invalid(format!(
                    "label {l} at row {i} outside 0..{c}"
                )));
            }
            class_index[l].push(i);
        }
        if let Some(j) = class_index.iter().position(Vec::is_empty) {
            return Err(Error::invalid(format!("class {j} has no members")));
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_names,
            class_index,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Row indices of each class, in dataset order.
    pub fn class_index(&self) -> &[Vec<usize>] {
        &self.class_index
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.class_index.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.cols()
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Sub-dataset of the given rows, keeping the class numbering.
    pub fn subset(&self, rows: &[usize]) -> Result<LabeledDataset> {
        if rows.is_empty() {
            return Err(Error::invalid("empty subset"));
        }
        let features = self.features.select_rows(rows);
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        Self::with_class_names(features, labels, self.class_names.clone())
    }

    /// Same labels, different features (e.g. after projection).
    pub fn with_features(&self, features: Matrix) -> Result<LabeledDataset> {
        Self::with_class_names(features, self.labels.clone(), self.class_names.clone())
    }
}

fn format_err(row: usize, message: impl Into<String>) -> Error {
    Error::Format {
        row,
        message: message.into(),
    }
}

/// Parses feature CSV text. Row numbers in errors count data rows from 1.
pub fn parse_feature_csv(text: &str) -> Result<LabeledDataset> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or_else(|| format_err(0, "empty file"))?;
    let m = header.split(',').count() - 1;
    if m == 0 {
        return Err(format_err(0, "header has no feature columns"));
    }

    let mut lookup: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    let mut labels = Vec::new();
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let label = cells.next().unwrap_or_default().trim();
        if label.is_empty() {
            return Err(format_err(row, "empty label"));
        }
        let before = entries.len();
        for (col, cell) in cells.enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| format_err(row, format!("column {col}: not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(format_err(row, format!("column {col}: non-finite value")));
            }
            entries.push(v);
        }
        let got = entries.len() - before;
        if got != m {
            return Err(format_err(row, format!("expected {m} feature cells, got {got}")));
        }
        let next = names.len();
        let class = *lookup.entry(label.to_string()).or_insert_with(|| {
            names.push(label.to_string());
            next
        });
        labels.push(class);
    }
    if labels.is_empty() {
        return Err(format_err(0, "no data rows"));
    }
    let features = Matrix::from_row_major(labels.len(), m, entries)?;
    LabeledDataset::with_class_names(features, labels, names)
}

pub fn load_feature_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_csv(&text)
}

/// Renders a dataset in the feature CSV format with 17 significant digits per value.
pub fn to_feature_csv(d: &LabeledDataset) -> String {
    let mut out = String::from("label");
    for j in 0..d.dims() {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for i in 0..d.len() {
        out.push_str(&d.class_names[d.labels[i]]);
        for j in 0..d.dims() {
            let _ = write!(out, ",{:.16e}", d.features[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn write_feature_csv(d: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_feature_csv(d)).map_err(|e| Error::io(path, e))
}

/// Rejects (or, with `clamp`, zeroes round-off sized) negative entries.
/// Returns the dataset and the number of clamped entries.
pub fn validate_nonnegative(d: LabeledDataset, clamp: bool) -> Result<(LabeledDataset, usize)> {
    let f = d.features();
    let mut clamped = Vec::new();
    for i in 0..f.rows() {
        for j in 0..f.cols() {
            let v = f[(i, j)];
            if v >= 0.0 {
                continue;
            }
            if clamp && v >= -NONNEG_CLAMP_TOLERANCE {
                clamped.push((i, j));
            } else {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    if clamped.is_empty() {
        return Ok((d, 0));
    }
    let mut m = f.as_dmatrix().clone();
    for &(i, j) in &clamped {
        m[(i, j)] = 0.0;
    }
    let count = clamped.len();
    Ok((d.with_features(Matrix::from_dmatrix(m))?, count))
}

/// Per-class split sizes and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

/// Train/test pair drawn from one dataset, with the source rows each side came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl Split {
    /// Hex SHA-256 over the train and test source-row lists; equal hashes mean the same split.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for (tag, rows) in [(b"train", &self.train_rows), (b"test!", &self.test_rows)] {
            h.update(tag);
            for r in rows {
                h.update((*r as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

fn class_seed(seed: u64, class: usize) -> u64 {
    // SplitMix64 finalizer over seed ^ golden-ratio multiple of the class index.
    let mut z = seed ^ (class as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn split_per_class(d: &LabeledDataset, spec: &SplitSpec) -> Result<Split> {
    if spec.train_per_class == 0 || spec.test_per_class == 0 {
        return Err(Error::invalid("train_per_class and test_per_class must be >= 1"));
    }
    let need = spec.train_per_class + spec.test_per_class;
    let mut train_rows = Vec::with_capacity(spec.train_per_class * d.class_count());
    let mut test_rows = Vec::with_capacity(spec.test_per_class * d.class_count());
    for (class, members) in d.class_index().iter().enumerate() {
        if members.len() < need {
            return Err(Error::InsufficientClassSize {
                class,
                have: members.len(),
                need,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(class_seed(spec.seed, class));
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        train_rows.extend_from_slice(&shuffled[..spec.train_per_class]);
        test_rows.extend_from_slice(&shuffled[spec.train_per_class..need]);
    }
    Ok(Split {
        train: d.subset(&train_rows)?,
        test: d.subset(&test_rows)?,
        train_rows,
        test_rows,
    })
}
