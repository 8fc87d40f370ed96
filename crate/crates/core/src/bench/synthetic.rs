//! Synthetic-data experiment: Gaussian-mixture features, PCA, scaling,
//! geometric-difference relabeling, then a weighted quantum-kernel SVM
//! compared between coreset and random selection.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{
    random_subset_indices, run_cells, trial_seed, RunResult, Selection, SizeSpec,
};
use crate::bounds::{measure_bound_inputs, qkernel_coreset_bound, ModelSetup};
use crate::coreset::{
    coreset_error, covering_radius, greedy_k_center, Coreset, Metric, WeightMode,
};
use crate::data::{
    dataset_sha256, gen_gaussian_mixture, pca_fit_transform, scale_features, split,
    GaussianMixtureConfig, LabeledDataset, Provenance,
};
use crate::error::{Error, Result};
use crate::qkernel::{
    kernel_matrix, median_pairwise_distance, rbf_matrix, FeatureMapConfig, QuantumKernel,
};
use crate::relabel::geometric_relabel;
use crate::wsvm::{decision_function, solve_weighted_dual, DualProblem, SvmModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBenchConfig {
    /// Must be "qkernel-svm"; recorded for the results table.
    pub model: String,
    pub n_train: usize,
    pub n_test: usize,
    pub gen: GaussianMixtureConfig,
    /// PCA output dimension; must equal the feature map's qubit count.
    pub pca_dim: usize,
    pub feature_map: FeatureMapConfig,
    /// RBF bandwidth for the classical kernel; median pairwise distance
    /// when absent.
    #[serde(default)]
    pub rbf_sigma: Option<f64>,
    pub svm_c: f64,
    pub svm_tol: f64,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub zetas: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub weight_mode: WeightMode,
    /// Wall-times recorded as zero when disabled, keeping result CSVs
    /// byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

pub(crate) fn default_true() -> bool {
    true
}

impl SyntheticBenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model != "qkernel-svm" {
            return Err(Error::invalid(format!(
                "synthetic task trains model \"qkernel-svm\", got \"{}\"",
                self.model
            )));
        }
        if self.gen.n != self.n_train + self.n_test {
            return Err(Error::invalid(format!(
                "gen.n ({}) must equal n_train + n_test ({})",
                self.gen.n,
                self.n_train + self.n_test
            )));
        }
        if self.pca_dim != self.feature_map.n_qubits {
            return Err(Error::invalid(
                "pca_dim must match the feature map qubit count",
            ));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.svm_c > 0.0) || !(self.svm_tol > 0.0) {
            return Err(Error::invalid("svm_c and svm_tol must be positive"));
        }
        SizeSpec::from_options(&self.sizes, &self.zetas)?;
        Ok(())
    }
}

/// Generate, reduce, scale, and relabel the synthetic dataset, then split
/// it into train and test parts.
pub fn build_synthetic_dataset(
    cfg: &SyntheticBenchConfig,
) -> Result<(LabeledDataset, LabeledDataset)> {
    cfg.validate()?;
    let raw = gen_gaussian_mixture(&cfg.gen, cfg.seed)?;
    let (_, reduced) = pca_fit_transform(&raw, cfg.pca_dim)?;
    let (_, scaled) = scale_features(&reduced, 0.0, std::f64::consts::PI)?;

    let source_hash = dataset_sha256(&scaled);
    let kq = kernel_matrix(&cfg.feature_map, &scaled)?;
    let sigma = match cfg.rbf_sigma {
        Some(s) => s,
        None => median_pairwise_distance(scaled.features().view()).max(1e-12),
    };
    let kc = rbf_matrix(&scaled, sigma)?;
    let signs = geometric_relabel(&kq.entries, &kc.entries)?;
    let labels: Vec<usize> = signs.iter().map(|&s| usize::from(s > 0.0)).collect();

    let provenance = Provenance::new(
        "geometric-relabel",
        cfg.seed,
        serde_json::json!({
            "source": source_hash,
            "kq": hex::encode(kq.kind.config_sha256()),
            "kc": hex::encode(kc.kind.config_sha256()),
            "rbf_sigma": sigma,
        }),
    );
    let relabeled = scaled.with_labels(labels, provenance)?;

    let test_fraction = cfg.n_test as f64 / (cfg.n_train + cfg.n_test) as f64;
    let (train, test) = split(&relabeled, test_fraction, cfg.seed)?;
    Ok((train, test))
}

fn signed_labels(ds: &LabeledDataset) -> Vec<f64> {
    ds.labels()
        .iter()
        .map(|&l| if l == 1 { 1.0 } else { -1.0 })
        .collect()
}

/// Clipped hypothesis loss |clip(f) - y| per row of a fitted kernel.
fn clipped_losses(
    qk: &QuantumKernel,
    model: &SvmModel,
    ds: &LabeledDataset,
    ys: &[f64],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ds.n_rows());
    for i in 0..ds.n_rows() {
        let row = qk.row(&ds.row_vec(i))?;
        let f = decision_function(model, &row)?;
        out.push((f.clamp(-1.0, 1.0) - ys[i]).abs());
    }
    Ok(out)
}

struct TrainedCell {
    accuracy: f64,
    kernel_ms: f64,
    train_ms: f64,
    coreset_err: f64,
    bound_sum: f64,
}

fn train_and_evaluate(
    cfg: &SyntheticBenchConfig,
    train: &LabeledDataset,
    test: &LabeledDataset,
    subset_idx: &[usize],
    weights: &[u64],
    coreset_for_bound: &Coreset,
) -> Result<TrainedCell> {
    let subset = train.subset(subset_idx)?;
    let ys = signed_labels(&subset);

    let kernel_started = Instant::now();
    let qk = QuantumKernel::fit(cfg.feature_map, subset.features().view())?;
    let gram = qk.gram()?;
    let kernel_ms = kernel_started.elapsed().as_secs_f64() * 1e3;

    let train_started = Instant::now();
    let problem = DualProblem::from_kernel(&gram, ys.clone(), cfg.svm_c, Some(weights))?;
    let model = solve_weighted_dual(&problem, cfg.svm_tol)?;
    let train_ms = train_started.elapsed().as_secs_f64() * 1e3;

    let test_ys = signed_labels(test);
    let mut hits = 0usize;
    for i in 0..test.n_rows() {
        let row = qk.row(&test.row_vec(i))?;
        let f = decision_function(&model, &row)?;
        let pred = if f >= 0.0 { 1.0 } else { -1.0 };
        if pred == test_ys[i] {
            hits += 1;
        }
    }
    let accuracy = hits as f64 / test.n_rows() as f64;

    let full_ys = signed_labels(train);
    let full_losses = clipped_losses(&qk, &model, train, &full_ys)?;
    let sub_losses = clipped_losses(&qk, &model, &subset, &ys)?;
    let coreset_err = coreset_error(&full_losses, &sub_losses, weights, cfg.weight_mode)?;

    let setup = ModelSetup::QuantumKernelSvm {
        cfg: &cfg.feature_map,
        model: &model,
    };
    let (inputs, prov) = measure_bound_inputs(&setup, coreset_for_bound, train, 0.05, None, None)?;
    let bound = qkernel_coreset_bound(&inputs)?.with_provenance(prov);

    Ok(TrainedCell {
        accuracy,
        kernel_ms,
        train_ms,
        coreset_err,
        bound_sum: bound.sum,
    })
}

/// A `Coreset` record for an arbitrary subset: unit weights, measured
/// per-class covering radii. Used to report bound inputs for the random
/// baseline.
fn subset_as_coreset(
    train: &LabeledDataset,
    indices: &[usize],
    seed: u64,
) -> Result<Coreset> {
    let mut class_radii = Vec::with_capacity(train.n_classes());
    for class in 0..train.n_classes() {
        class_radii.push(covering_radius(train, indices, Metric::Euclidean, class)?);
    }
    let radius = class_radii.iter().copied().fold(0.0, f64::max);
    Ok(Coreset {
        center_indices: indices.to_vec(),
        weights: vec![1; indices.len()],
        class_radii,
        radius,
        prune_rate: indices.len() as f64 / train.n_rows() as f64,
        seed,
        metric: Metric::Euclidean,
    })
}

pub fn run_synthetic(cfg: &SyntheticBenchConfig, jobs: usize) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let (train, test) = build_synthetic_dataset(cfg)?;
    let sizes = SizeSpec::from_options(&cfg.sizes, &cfg.zetas)?.resolve(train.n_rows())?;

    run_cells(&sizes, cfg.trials, jobs, |size, trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut out = Vec::with_capacity(2);

        // Coreset selection.
        let sel_started = Instant::now();
        let coreset = greedy_k_center(&train, size, Metric::Euclidean, seed)?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let cell = train_and_evaluate(
            cfg,
            &train,
            &test,
            &coreset.center_indices,
            &coreset.weights,
            &coreset,
        )?;
        out.push(RunResult {
            task: "synthetic".into(),
            selection: Selection::Coreset,
            size: coreset.len(),
            zeta: coreset.prune_rate,
            trial,
            seed,
            accuracy: cell.accuracy,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: if cfg.record_timings { cell.kernel_ms } else { 0.0 },
            train_ms: if cfg.record_timings { cell.train_ms } else { 0.0 },
            coreset_error: cell.coreset_err,
            bound_sum: cell.bound_sum,
        });

        // Paired random baseline with the same seed.
        let sel_started = Instant::now();
        let idx = random_subset_indices(train.labels(), train.n_classes(), size, seed)?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let pseudo = subset_as_coreset(&train, &idx, seed)?;
        let unit = vec![1u64; idx.len()];
        let cell = train_and_evaluate(cfg, &train, &test, &idx, &unit, &pseudo)?;
        out.push(RunResult {
            task: "synthetic".into(),
            selection: Selection::Random,
            size,
            zeta: size as f64 / train.n_rows() as f64,
            trial,
            seed,
            accuracy: cell.accuracy,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: if cfg.record_timings { cell.kernel_ms } else { 0.0 },
            train_ms: if cfg.record_timings { cell.train_ms } else { 0.0 },
            coreset_error: cell.coreset_err,
            bound_sum: cell.bound_sum,
        });
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config() -> SyntheticBenchConfig {
        SyntheticBenchConfig {
            model: "qkernel-svm".into(),
            n_train: 60,
            n_test: 20,
            gen: GaussianMixtureConfig {
                n: 80,
                dim: 4,
                clusters: 4,
                spread: 0.4,
                separation: 2.0,
                cluster_weights: None,
            },
            pca_dim: 2,
            feature_map: FeatureMapConfig::product(2),
            rbf_sigma: None,
            svm_c: 1.0,
            svm_tol: 1e-6,
            sizes: Some(vec![20, 60]),
            zetas: None,
            trials: 2,
            seed: 5,
            weight_mode: WeightMode::Normalized,
            record_timings: false,
        }
    }

    #[test]
    fn pipeline_builds_balanced_relabeled_dataset() {
        let cfg = small_config();
        let (train, test) = build_synthetic_dataset(&cfg).unwrap();
        assert_eq!(train.n_rows() + test.n_rows(), 80);
        assert_eq!(train.n_classes(), 2);
        assert_eq!(train.dim(), 2);
        // Median split keeps the classes balanced overall.
        let mut counts = train.class_counts();
        let test_counts = test.class_counts();
        counts[0] += test_counts[0];
        counts[1] += test_counts[1];
        assert_eq!(counts[0], 40);
        assert_eq!(counts[1], 40);
    }

    #[test]
    fn full_size_sweep_point_matches_between_selections() {
        let mut cfg = small_config();
        cfg.sizes = Some(vec![60]);
        cfg.trials = 1;
        let results = run_synthetic(&cfg, 1).unwrap();
        assert_eq!(results.len(), 2);
        // Both selections use the whole training set, so accuracy agrees.
        assert_eq!(results[0].accuracy, results[1].accuracy);
        assert!((results[0].zeta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_results_with_timings_off() {
        let cfg = small_config();
        let a = run_synthetic(&cfg, 1).unwrap();
        let b = run_synthetic(&cfg, 1).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        super::super::write_results_csv(&mut buf_a, &a).unwrap();
        super::super::write_results_csv(&mut buf_b, &b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn parallel_run_matches_sequential() {
        let cfg = small_config();
        let a = run_synthetic(&cfg, 1).unwrap();
        let b = run_synthetic(&cfg, 2).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        super::super::write_results_csv(&mut buf_a, &a).unwrap();
        super::super::write_results_csv(&mut buf_b, &b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = small_config();
        cfg.model = "qnn".into();
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.gen.n = 10;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.pca_dim = 3;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.sizes = None;
        assert!(cfg.validate().is_err());
    }
}
