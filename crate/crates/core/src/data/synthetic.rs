//! Gaussian-mixture feature generator for the synthetic benchmark
//! pipeline. Cluster geometry is seeded and fully deterministic; the
//! labels produced here are provisional (cluster parity) and are replaced
//! by the geometric-difference relabeler downstream.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMixtureConfig {
    pub n: usize,
    pub dim: usize,
    pub clusters: usize,
    /// Standard deviation of points around their cluster center.
    pub spread: f64,
    /// Scale of the cluster-center positions.
    pub separation: f64,
    /// Optional relative cluster masses; uniform when absent.
    #[serde(default)]
    pub cluster_weights: Option<Vec<f64>>,
}

/// Draw a seeded Gaussian mixture. The first `clusters` rows are pinned
/// one per cluster so every cluster is populated.
pub fn gen_gaussian_mixture(cfg: &GaussianMixtureConfig, seed: u64) -> Result<LabeledDataset> {
    if cfg.clusters < 2 {
        return Err(Error::invalid("need at least 2 clusters"));
    }
    if cfg.n < cfg.clusters {
        return Err(Error::invalid("need at least one sample per cluster"));
    }
    if cfg.dim == 0 {
        return Err(Error::invalid("feature dimension must be positive"));
    }
    if !(cfg.spread > 0.0) || !(cfg.separation > 0.0) {
        return Err(Error::invalid("spread and separation must be positive"));
    }
    let weights = match &cfg.cluster_weights {
        Some(w) => {
            if w.len() != cfg.clusters || w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::invalid("cluster_weights must be positive, one per cluster"));
            }
            w.clone()
        }
        None => vec![1.0; cfg.clusters],
    };
    let total: f64 = weights.iter().sum();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..cfg.clusters)
        .map(|_| {
            (0..cfg.dim)
                .map(|_| cfg.separation * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();

    let mut features = Array2::<f64>::zeros((cfg.n, cfg.dim));
    let mut labels = Vec::with_capacity(cfg.n);
    for i in 0..cfg.n {
        let cluster = if i < cfg.clusters {
            i
        } else {
            let mut u: f64 = rng.random_range(0.0..total);
            let mut pick = cfg.clusters - 1;
            for (c, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = c;
                    break;
                }
                u -= w;
            }
            pick
        };
        for j in 0..cfg.dim {
            features[[i, j]] =
                centers[cluster][j] + cfg.spread * rng.sample::<f64, _>(StandardNormal);
        }
        labels.push(cluster % 2);
    }

    let provenance = Provenance::new(
        "gaussian-mixture",
        seed,
        serde_json::to_value(cfg).expect("config serializes"),
    );
    LabeledDataset::new(features, labels, provenance)
}
