use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{DataError, Dataset, Split};
use crate::tensor::Matrix;

/// Column layout of a feature CSV: modality `k` occupies the columns
/// `m{k}_0 … m{k}_{d_k−1}` in order, followed by one `label` column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsvSchema {
    pub modality_dims: Vec<usize>,
    pub num_classes: usize,
}

impl CsvSchema {
    pub fn header(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .modality_dims
            .iter()
            .enumerate()
            .flat_map(|(k, &d)| (0..d).map(move |j| format!("m{k}_{j}")))
            .collect();
        cols.push("label".to_string());
        cols
    }

    pub fn for_dataset(ds: &Dataset) -> Self {
        Self {
            modality_dims: ds.dims(),
            num_classes: ds.num_classes(),
        }
    }
}

/// Loads a dataset. Rows in error messages are 1-based file line numbers.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let expected = schema.header();
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(DataError::Header {
            expected: expected.join(","),
            found: found.join(","),
        });
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.modality_dims.len()];
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != expected.len() {
            return Err(DataError::Ragged {
                row,
                expected: expected.len(),
                found: record.len(),
            });
        }
        let mut field = 0;
        for (k, &d) in schema.modality_dims.iter().enumerate() {
            for _ in 0..d {
                let raw = &record[field];
                let value: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                    DataError::NotNumeric {
                        row,
                        column: expected[field].clone(),
                        value: raw.to_string(),
                    }
                })?;
                columns[k].push(value);
                field += 1;
            }
        }
        let raw = &record[field];
        let label = raw
            .parse::<usize>()
            .ok()
            .filter(|&l| l < schema.num_classes)
            .ok_or_else(|| DataError::BadLabel {
                row,
                value: raw.to_string(),
                classes: schema.num_classes,
            })?;
        labels.push(label);
    }

    let rows = labels.len();
    let features = columns
        .into_iter()
        .zip(&schema.modality_dims)
        .map(|(data, &d)| Matrix::from_vec(rows, d, data))
        .collect();
    Dataset::new(features, labels, schema.num_classes, Split::Train)
}

/// Writes a dataset in the layout [`load_csv`] reads. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<(), DataError> {
    let path = path.as_ref();
    let io_err = |source| DataError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = std::io::BufWriter::new(File::create(path).map_err(io_err)?);
    let schema = CsvSchema::for_dataset(ds);
    writeln!(out, "{}", schema.header().join(",")).map_err(io_err)?;
    for i in 0..ds.len() {
        let mut line = String::new();
        for f in ds.features() {
            for v in f.row(i) {
                line.push_str(&format!("{v:?},"));
            }
        }
        line.push_str(&ds.labels()[i].to_string());
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

impl Dataset {
    pub fn with_split(mut self, split: Split) -> Self {
        self.split = split;
        self
    }

    /// Deterministic stratified 80/20 split in file order: within each
    /// class the last `⌊n/5⌋` rows go to the test side.
    pub fn stratified_split(&self) -> Result<(Dataset, Dataset), DataError> {
        let counts = self.class_counts();
        let mut seen = vec![0usize; self.num_classes()];
        let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
        for (i, &l) in self.labels().iter().enumerate() {
            let n_train = counts[l] - counts[l] / 5;
            if seen[l] < n_train {
                train_idx.push(i);
            } else {
                test_idx.push(i);
            }
            seen[l] += 1;
        }
        let pick = |idx: &[usize], split| {
            let b = self.batch(idx);
            Dataset::new(b.features, b.labels, self.num_classes(), split)
        };
        Ok((pick(&train_idx, Split::Train)?, pick(&test_idx, Split::Test)?))
    }
}
