//! Principal component analysis through the crate's Jacobi
//! eigendecomposition of the sample covariance.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::relabel::{default_eig_tol, sym_eig};

/// A fitted PCA projection.
///
/// `components` holds the top eigenvectors of the sample covariance as
/// orthonormal rows; `explained_variance` the matching eigenvalues,
/// nonincreasing and clamped at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn d_out(&self) -> usize {
        self.components.len()
    }

    pub fn d_in(&self) -> usize {
        self.mean.len()
    }

    /// (X - mean) C^T for a raw feature matrix.
    pub fn transform_matrix(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.d_in() {
            return Err(Error::DimMismatch {
                expected: self.d_in(),
                got: features.ncols(),
            });
        }
        let mut centered = features.clone();
        for mut row in centered.rows_mut() {
            for (v, m) in row.iter_mut().zip(self.mean.iter()) {
                *v -= m;
            }
        }
        let comp = self.components_matrix();
        Ok(centered.dot(&comp.t()))
    }

    /// Project a dataset, keeping labels and provenance.
    pub fn transform(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        let projected = self.transform_matrix(ds.features())?;
        LabeledDataset::new(projected, ds.labels().to_vec(), ds.provenance().clone())
    }

    /// Projection followed by reconstruction back into the input space.
    pub fn reconstruct(&self, projected: &Array2<f64>) -> Result<Array2<f64>> {
        if projected.ncols() != self.d_out() {
            return Err(Error::DimMismatch {
                expected: self.d_out(),
                got: projected.ncols(),
            });
        }
        let comp = self.components_matrix();
        let mut out = projected.dot(&comp);
        for mut row in out.rows_mut() {
            for (v, m) in row.iter_mut().zip(self.mean.iter()) {
                *v += m;
            }
        }
        Ok(out)
    }

    fn components_matrix(&self) -> Array2<f64> {
        let d_out = self.d_out();
        let d_in = self.d_in();
        let flat: Vec<f64> = self.components.iter().flatten().copied().collect();
        Array2::from_shape_vec((d_out, d_in), flat).expect("component rows validated at fit")
    }
}

/// Fit PCA on a dataset and project it to `d_out` dimensions.
pub fn pca_fit_transform(ds: &LabeledDataset, d_out: usize) -> Result<(PcaModel, LabeledDataset)> {
    let n = ds.n_rows();
    let d = ds.dim();
    if d_out < 1 || d_out > n.min(d) {
        return Err(Error::invalid(format!(
            "d_out {d_out} outside 1..=min(N_t={n}, d_x={d})"
        )));
    }

    let mean: Array1<f64> = ds
        .features()
        .t()
        .rows()
        .into_iter()
        .map(|col| col.sum() / n as f64)
        .collect();

    let mut centered = ds.features().clone();
    for mut row in centered.rows_mut() {
        for (v, m) in row.iter_mut().zip(mean.iter()) {
            *v -= m;
        }
    }

    // Sample covariance, built exactly symmetric.
    let mut cov = Array2::<f64>::zeros((d, d));
    if n > 1 {
        let raw = centered.t().dot(&centered) / (n as f64 - 1.0);
        for i in 0..d {
            for j in i..d {
                let v = 0.5 * (raw[[i, j]] + raw[[j, i]]);
                cov[[i, j]] = v;
                cov[[j, i]] = v;
            }
        }
    }

    let eig = sym_eig(&cov, default_eig_tol(&cov))?;
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(d_out);
    let mut explained = Vec::with_capacity(d_out);
    for c in 0..d_out {
        let mut row: Vec<f64> = (0..d).map(|k| eig.eigenvectors[[k, c]]).collect();
        // Deterministic sign gauge: the largest-magnitude entry is positive.
        let mut imax = 0;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[imax].abs() {
                imax = i;
            }
        }
        if row[imax] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
        components.push(row);
        explained.push(eig.eigenvalues[c].max(0.0));
    }

    let model = PcaModel {
        mean: mean.to_vec(),
        components,
        explained_variance: explained,
    };
    let transformed = model.transform(ds)?;
    Ok((model, transformed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ds_from(features: Array2<f64>) -> LabeledDataset {
        let n = features.nrows();
        let labels = vec![0usize; n];
        LabeledDataset::new(features, labels, Provenance::new("t", 0, serde_json::json!({})))
            .unwrap()
    }

    #[test]
    fn line_in_three_dims_is_rank_one() {
        // Points on a 1-D line embedded in 3-D.
        let mut rows = Vec::new();
        for t in 0..10 {
            let t = t as f64;
            rows.extend_from_slice(&[2.0 * t, -t, 0.5 * t]);
        }
        let ds = ds_from(Array2::from_shape_vec((10, 3), rows).unwrap());
        let (model, _) = pca_fit_transform(&ds, 1).unwrap();
        // Total variance = trace of the covariance = sum over a full fit.
        let (full, _) = pca_fit_transform(&ds, 3).unwrap();
        let total: f64 = full.explained_variance.iter().sum();
        assert!(model.explained_variance[0] > 0.0);
        assert!((model.explained_variance[0] - total).abs() < 1e-8 * total.max(1.0));
    }

    #[test]
    fn identical_points_give_zero_variance() {
        let ds = ds_from(array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]);
        let (model, proj) = pca_fit_transform(&ds, 2).unwrap();
        for v in &model.explained_variance {
            assert!(v.abs() < 1e-12);
        }
        for v in proj.features().iter() {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn full_rank_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let feats = Array2::from_shape_fn((50, 8), |_| rng.random_range(-2.0..2.0));
        let ds = ds_from(feats.clone());
        let (model, proj) = pca_fit_transform(&ds, 8).unwrap();
        let back = model.reconstruct(proj.features()).unwrap();
        for (a, b) in back.iter().zip(feats.iter()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn components_orthonormal_and_variance_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let feats = Array2::from_shape_fn((40, 5), |_| rng.random_range(-1.0..1.0));
        let ds = ds_from(feats);
        let (model, _) = pca_fit_transform(&ds, 4).unwrap();
        for i in 0..4 {
            for j in i..4 {
                let dot: f64 = model.components[i]
                    .iter()
                    .zip(model.components[j].iter())
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
        for w in model.explained_variance.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn d_out_out_of_range_rejected() {
        let ds = ds_from(array![[1.0, 2.0], [3.0, 4.0]]);
        assert!(pca_fit_transform(&ds, 0).is_err());
        assert!(pca_fit_transform(&ds, 3).is_err());
    }
}
