//! Per-feature affine scaling into a target interval.
//!
//! The crate default maps features into [0, pi] so the shifted pairwise
//! feature-map coefficients stay bounded and the bound evaluators get a
//! concrete maximum feature value.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// Fitted per-feature min/max with the target interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

impl ScalerParams {
    pub fn transform_matrix(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.min.len() {
            return Err(Error::DimMismatch {
                expected: self.min.len(),
                got: features.ncols(),
            });
        }
        let mid = 0.5 * (self.lo + self.hi);
        let mut out = features.clone();
        for mut row in out.rows_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                let (mn, mx) = (self.min[j], self.max[j]);
                *v = if mx > mn {
                    self.lo + (*v - mn) / (mx - mn) * (self.hi - self.lo)
                } else {
                    mid
                };
            }
        }
        Ok(out)
    }

    pub fn transform(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        let out = self.transform_matrix(ds.features())?;
        LabeledDataset::new(out, ds.labels().to_vec(), ds.provenance().clone())
    }
}

/// Fit min/max per feature and map the dataset into [lo, hi]. Constant
/// features map to the interval midpoint.
pub fn scale_features(
    ds: &LabeledDataset,
    lo: f64,
    hi: f64,
) -> Result<(ScalerParams, LabeledDataset)> {
    if hi <= lo {
        return Err(Error::invalid(format!("hi ({hi}) must exceed lo ({lo})")));
    }
    let d = ds.dim();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in ds.features().rows() {
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    let params = ScalerParams { min, max, lo, hi };
    let scaled = params.transform(ds)?;
    Ok((params, scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Provenance;
    use ndarray::array;
    use std::f64::consts::PI;

    fn ds_from(features: Array2<f64>) -> LabeledDataset {
        let n = features.nrows();
        LabeledDataset::new(
            features,
            vec![0; n],
            Provenance::new("t", 0, serde_json::json!({})),
        )
        .unwrap()
    }

    #[test]
    fn affine_map_to_pi() {
        let ds = ds_from(array![[0.0], [1.0], [2.0]]);
        let (_, scaled) = scale_features(&ds, 0.0, PI).unwrap();
        let col: Vec<f64> = scaled.features().column(0).to_vec();
        assert!((col[0] - 0.0).abs() < 1e-15);
        assert!((col[1] - PI / 2.0).abs() < 1e-15);
        assert!((col[2] - PI).abs() < 1e-15);
    }

    #[test]
    fn constant_column_maps_to_midpoint() {
        let ds = ds_from(array![[3.0], [3.0]]);
        let (_, scaled) = scale_features(&ds, 0.0, PI).unwrap();
        for v in scaled.features().iter() {
            assert!((v - PI / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn in_range_data_unchanged() {
        let ds = ds_from(array![[0.0, 1.0], [0.5, 2.0], [1.0, 3.0]]);
        let (_, scaled) = scale_features(&ds, 0.0, 1.0).unwrap();
        let col0: Vec<f64> = scaled.features().column(0).to_vec();
        assert_eq!(col0, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn degenerate_interval_rejected() {
        let ds = ds_from(array![[1.0]]);
        assert!(scale_features(&ds, 1.0, 1.0).is_err());
    }

    #[test]
    fn transform_applies_training_ranges_to_new_data() {
        let train = ds_from(array![[0.0], [2.0]]);
        let (params, _) = scale_features(&train, 0.0, 1.0).unwrap();
        let test = array![[1.0], [4.0]];
        let out = params.transform_matrix(&test).unwrap();
        assert!((out[[0, 0]] - 0.5).abs() < 1e-15);
        assert!((out[[1, 0]] - 2.0).abs() < 1e-15); // outside range extrapolates
    }
}
