//! Labeled multimodal datasets: synthetic Gaussian class clusters, a CSV
//! loader, and seeded mini-batching.

mod batch;
mod csv_io;
mod synth;

pub use batch::{batches, Batch};
pub use csv_io::{load_csv, write_csv, CsvSchema};
pub use synth::{generate_synthetic, SynthSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NotNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: label `{value}` is not a class in 0..{classes}")]
    BadLabel {
        row: usize,
        value: String,
        classes: usize,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Row-aligned per-modality feature matrices with integer labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<Matrix>,
    labels: Vec<usize>,
    num_classes: usize,
    split: Split,
}

impl Dataset {
    pub fn new(
        features: Vec<Matrix>,
        labels: Vec<usize>,
        num_classes: usize,
        split: Split,
    ) -> Result<Self, DataError> {
        if features.is_empty() {
            return Err(DataError::Inconsistent("no modalities".into()));
        }
        if num_classes == 0 {
            return Err(DataError::Inconsistent("zero classes".into()));
        }
        for (k, f) in features.iter().enumerate() {
            if f.rows() != labels.len() {
                return Err(DataError::Inconsistent(format!(
                    "modality {k} has {} rows but there are {} labels",
                    f.rows(),
                    labels.len()
                )));
            }
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(DataError::Inconsistent(format!(
                "label {l} at row {i} outside 0..{num_classes}"
            )));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_modalities(&self) -> usize {
        self.features.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn features(&self) -> &[Matrix] {
        &self.features
    }

    pub fn modality(&self, k: usize) -> &Matrix {
        &self.features[k]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn dims(&self) -> Vec<usize> {
        self.features.iter().map(Matrix::cols).collect()
    }

    /// Rows with the given indices, in order, as one batch.
    pub fn batch(&self, indices: &[usize]) -> Batch {
        Batch {
            features: self.features.iter().map(|f| f.select_rows(indices)).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            indices: indices.to_vec(),
        }
    }

    /// The whole dataset as a single batch.
    pub fn full_batch(&self) -> Batch {
        Batch {
            features: self.features.clone(),
            labels: self.labels.clone(),
            indices: (0..self.len()).collect(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}
