//! Labeled feature datasets: construction, CSV and JSON persistence.

use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A single feature row.
pub type FeatureVector = Vec<f64>;

/// Where a dataset came from; carried through every serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
    pub params: serde_json::Value,
}

impl Provenance {
    pub fn new(generator: impl Into<String>, seed: u64, params: serde_json::Value) -> Self {
        Provenance {
            generator: generator.into(),
            seed,
            params,
        }
    }
}

/// A feature matrix with contiguous integer class labels.
///
/// Labels always cover 0..n_classes-1 with every class present at least
/// once; ingestion remaps raw labels in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>, provenance: Provenance) -> Result<Self> {
        let n = features.nrows();
        if n == 0 {
            return Err(Error::invalid("dataset must contain at least one row"));
        }
        if labels.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                got: labels.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset features must be finite"));
        }
        let n_classes = labels.iter().copied().max().unwrap_or(0) + 1;
        let mut seen = vec![false; n_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::EmptyClass(missing));
        }
        Ok(LabeledDataset {
            features,
            labels,
            n_classes,
            provenance,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn feature_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn row_vec(&self, i: usize) -> FeatureVector {
        self.features.row(i).to_vec()
    }

    /// Indices of rows in a class, ascending.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row subset by index; every original class must survive.
    pub fn subset(&self, indices: &[usize]) -> Result<LabeledDataset> {
        if indices.is_empty() {
            return Err(Error::invalid("subset must keep at least one row"));
        }
        let mut feats = Array2::<f64>::zeros((indices.len(), self.dim()));
        let mut labels = Vec::with_capacity(indices.len());
        for (out, &i) in indices.iter().enumerate() {
            if i >= self.n_rows() {
                return Err(Error::invalid(format!("subset index {i} out of range")));
            }
            feats.row_mut(out).assign(&self.features.row(i));
            labels.push(self.labels[i]);
        }
        let mut seen = vec![false; self.n_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::EmptyClass(missing));
        }
        LabeledDataset::new(feats, labels, self.provenance.clone())
    }

    /// Replace labels wholesale (used by the relabeler).
    pub fn with_labels(
        &self,
        labels: Vec<usize>,
        provenance: Provenance,
    ) -> Result<LabeledDataset> {
        LabeledDataset::new(self.features.clone(), labels, provenance)
    }

    /// Largest feature value in the dataset (the `r` of the kernel bound).
    pub fn max_feature(&self) -> f64 {
        self.features.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// Remap arbitrary integer labels to 0..n_c-1 in order of first appearance.
fn remap_labels(raw: &[i64]) -> Vec<usize> {
    let mut order: Vec<i64> = Vec::new();
    raw.iter()
        .map(|r| {
            if let Some(pos) = order.iter().position(|o| o == r) {
                pos
            } else {
                order.push(*r);
                order.len() - 1
            }
        })
        .collect()
}

/// Load a CSV dataset: UTF-8, comma-separated, first row is a header,
/// `label_column` indexes the label field. Labels are remapped to
/// contiguous integers preserving order of first appearance.
pub fn load_csv(path: impl AsRef<Path>, label_column: usize) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(BufReader::new(file));

    let n_cols = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 0,
            msg: e.to_string(),
        })?
        .len();
    if label_column >= n_cols {
        return Err(Error::invalid(format!(
            "label column {label_column} out of range for {n_cols} columns"
        )));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<i64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx + 1;
        let record = record.map_err(|e| Error::Csv {
            row: row_no,
            msg: e.to_string(),
        })?;
        if record.len() != n_cols {
            return Err(Error::Csv {
                row: row_no,
                msg: format!("ragged row: {} fields, header has {n_cols}", record.len()),
            });
        }
        let mut feats = Vec::with_capacity(n_cols - 1);
        for (col, field) in record.iter().enumerate() {
            if col == label_column {
                let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                    row: row_no,
                    msg: format!("non-numeric label '{field}'"),
                })?;
                if value.fract() != 0.0 || !value.is_finite() {
                    return Err(Error::Csv {
                        row: row_no,
                        msg: format!("label '{field}' is not an integer"),
                    });
                }
                raw_labels.push(value as i64);
            } else {
                let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                    row: row_no,
                    msg: format!("non-numeric feature '{field}' in column {col}"),
                })?;
                feats.push(value);
            }
        }
        rows.push(feats);
    }
    if rows.is_empty() {
        return Err(Error::Csv {
            row: 0,
            msg: "empty file: no data rows".into(),
        });
    }

    let d = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let features = Array2::from_shape_vec((raw_labels.len(), d), flat)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let labels = remap_labels(&raw_labels);
    let provenance = Provenance::new(
        "csv",
        0,
        serde_json::json!({ "path": path.as_ref().display().to_string() }),
    );
    LabeledDataset::new(features, labels, provenance)
}

/// Write a dataset as CSV with a generated header (f0..f{d-1}, label).
pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let header: Vec<String> = (0..ds.dim())
        .map(|i| format!("f{i}"))
        .chain(std::iter::once("label".to_string()))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..ds.n_rows() {
        let mut fields: Vec<String> = ds.feature_row(i).iter().map(|v| format!("{v}")).collect();
        fields.push(format!("{}", ds.labels()[i]));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

// JSON mirror with plain nested arrays for language neutrality.
#[derive(Serialize, Deserialize)]
struct DatasetFile {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    n_c: usize,
    d_x: usize,
    provenance: Provenance,
}

pub fn save_dataset_json(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = DatasetFile {
        features: (0..ds.n_rows()).map(|i| ds.row_vec(i)).collect(),
        labels: ds.labels().to_vec(),
        n_c: ds.n_classes(),
        d_x: ds.dim(),
        provenance: ds.provenance().clone(),
    };
    let out = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(BufWriter::new(out), &file)?;
    Ok(())
}

pub fn load_dataset_json(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path)?;
    let parsed: DatasetFile = serde_json::from_reader(BufReader::new(file))?;
    let n = parsed.features.len();
    let d = parsed.d_x;
    if parsed.features.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("feature rows disagree with d_x"));
    }
    let flat: Vec<f64> = parsed.features.into_iter().flatten().collect();
    let features =
        Array2::from_shape_vec((n, d), flat).map_err(|e| Error::invalid(e.to_string()))?;
    let ds = LabeledDataset::new(features, parsed.labels, parsed.provenance)?;
    if ds.n_classes() != parsed.n_c {
        return Err(Error::invalid(format!(
            "declared n_c {} disagrees with labels ({})",
            parsed.n_c,
            ds.n_classes()
        )));
    }
    Ok(ds)
}

/// Content hash over features and labels, hex encoded.
pub fn dataset_sha256(ds: &LabeledDataset) -> String {
    let mut hasher = Sha256::new();
    hasher.update((ds.n_rows() as u64).to_le_bytes());
    hasher.update((ds.dim() as u64).to_le_bytes());
    for v in ds.features().iter() {
        hasher.update(v.to_le_bytes());
    }
    for &l in ds.labels() {
        hasher.update((l as u64).to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn csv_label_remap_first_appearance() {
        let f = write_temp("a,b,label\n1.0,2.0,5\n3.0,4.0,5\n5.0,6.0,7\n");
        let ds = load_csv(f.path(), 2).unwrap();
        assert_eq!(ds.labels(), &[0, 0, 1]);
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn csv_single_row() {
        let f = write_temp("a,b,c,d,label\n1,2,3,4,0\n");
        let ds = load_csv(f.path(), 4).unwrap();
        assert_eq!(ds.n_rows(), 1);
        assert_eq!(ds.dim(), 4);
    }

    #[test]
    fn csv_non_numeric_feature_is_reported() {
        let f = write_temp("a,b,label\n1.0,oops,0\n");
        let err = load_csv(f.path(), 2).unwrap_err();
        assert!(err.to_string().contains("non-numeric"), "{err}");
    }

    #[test]
    fn csv_ragged_row_rejected() {
        let f = write_temp("a,b,label\n1.0,2.0,0\n1.0,0\n");
        let err = load_csv(f.path(), 2).unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn csv_empty_file_rejected() {
        let f = write_temp("a,b,label\n");
        assert!(load_csv(f.path(), 2).is_err());
    }

    #[test]
    fn csv_label_in_middle_column() {
        let f = write_temp("a,label,b\n1.0,3,2.0\n4.0,3,5.0\n7.0,4,8.0\n");
        let ds = load_csv(f.path(), 1).unwrap();
        assert_eq!(ds.labels(), &[0, 0, 1]);
        assert_eq!(ds.features()[[0, 1]], 2.0);
    }

    #[test]
    fn dataset_validation() {
        let prov = Provenance::new("test", 0, serde_json::json!({}));
        // Missing class 0.
        let bad = LabeledDataset::new(array![[1.0], [2.0]], vec![1, 1], prov.clone());
        assert!(bad.is_err());
        // Non-finite feature.
        let bad = LabeledDataset::new(array![[f64::NAN]], vec![0], prov);
        assert!(bad.is_err());
    }

    #[test]
    fn json_round_trip_and_hash() {
        let prov = Provenance::new("gen", 9, serde_json::json!({"k": 2}));
        let ds =
            LabeledDataset::new(array![[1.0, 2.0], [3.0, 4.0]], vec![0, 1], prov).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_dataset_json(&ds, f.path()).unwrap();
        let back = load_dataset_json(f.path()).unwrap();
        assert_eq!(ds, back);
        assert_eq!(dataset_sha256(&ds), dataset_sha256(&back));
    }

    #[test]
    fn csv_round_trip() {
        let prov = Provenance::new("gen", 1, serde_json::json!({}));
        let ds = LabeledDataset::new(
            array![[0.25, -1.5], [2.0, 3.5], [4.0, 5.0]],
            vec![0, 1, 0],
            prov,
        )
        .unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_csv(&ds, f.path()).unwrap();
        let back = load_csv(f.path(), 2).unwrap();
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.features(), ds.features());
    }

    #[test]
    fn subset_keeps_classes() {
        let prov = Provenance::new("t", 0, serde_json::json!({}));
        let ds = LabeledDataset::new(
            array![[0.0], [1.0], [2.0], [3.0]],
            vec![0, 0, 1, 1],
            prov,
        )
        .unwrap();
        let sub = ds.subset(&[0, 2]).unwrap();
        assert_eq!(sub.labels(), &[0, 1]);
        assert!(ds.subset(&[0, 1]).is_err()); // loses class 1
    }
}
