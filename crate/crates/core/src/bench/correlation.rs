//! Correlation-identification experiment: a four-class QNN on
//! density-matrix inputs, coreset selection under the Hilbert-Schmidt
//! metric.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::synthetic::default_true;
use super::{random_subset_indices, run_cells, trial_seed, RunResult, Selection, SizeSpec};
use crate::bounds::{qnn_coreset_bound, BoundInputs};
use crate::coreset::{
    coreset_error, covering_radius_core, greedy_k_center_densities,
};
use crate::data::{gen_correlation_dataset, stratified_split_indices, CorrelationClass};
use crate::error::{Error, Result};
use crate::qnn::{
    qnn_forward_density, qnn_loss, train_multiclass_density, Entangler, MulticlassQnn,
    ReuploadConfig, TrainConfig,
};
use crate::qsim::{hilbert_schmidt_distance, DensityMatrix};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationBenchConfig {
    /// Must be "qnn".
    pub model: String,
    pub n_train: usize,
    pub n_test: usize,
    pub qnn_layers: usize,
    pub entangler: Entangler,
    pub trainer: TrainConfig,
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
    #[serde(default)]
    pub zetas: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub record_timings: bool,
}

impl CorrelationBenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.model != "qnn" {
            return Err(Error::invalid(format!(
                "correlation task trains model \"qnn\", got \"{}\"",
                self.model
            )));
        }
        if self.trials < 1 || self.qnn_layers < 1 {
            return Err(Error::invalid("trials and qnn_layers must be at least 1"));
        }
        SizeSpec::from_options(&self.sizes, &self.zetas)?;
        Ok(())
    }

    fn qnn_config(&self) -> Result<ReuploadConfig> {
        let mut cfg = ReuploadConfig::standard(2, self.qnn_layers)?;
        cfg.entangler = self.entangler;
        Ok(cfg)
    }
}

struct CorrelationData {
    rhos: Vec<DensityMatrix>,
    labels: Vec<usize>,
    train_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

fn build_data(cfg: &CorrelationBenchConfig) -> Result<CorrelationData> {
    let samples = gen_correlation_dataset(cfg.n_train + cfg.n_test, cfg.seed)?;
    let rhos: Vec<DensityMatrix> = samples.iter().map(|s| s.rho.clone()).collect();
    let labels: Vec<usize> = samples.iter().map(|s| s.label.index()).collect();
    let fraction = cfg.n_test as f64 / (cfg.n_train + cfg.n_test) as f64;
    let (train_idx, test_idx) =
        stratified_split_indices(&labels, CorrelationClass::COUNT, fraction, cfg.seed)?;
    Ok(CorrelationData {
        rhos,
        labels,
        train_idx,
        test_idx,
    })
}

/// Mean over one-vs-rest heads of the per-sample MSE.
fn ovr_loss(model: &MulticlassQnn, rho: &DensityMatrix, label: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (class, head) in model.heads.iter().enumerate() {
        let y = if class == label { 1.0 } else { -1.0 };
        let pred = qnn_forward_density(&model.cfg, head, rho)?;
        acc += qnn_loss(pred, y);
    }
    Ok(acc / model.heads.len() as f64)
}

pub fn run_correlation(cfg: &CorrelationBenchConfig, jobs: usize) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let qnn_cfg = cfg.qnn_config()?;
    let data = build_data(cfg)?;
    let train_rhos: Vec<DensityMatrix> = data
        .train_idx
        .iter()
        .map(|&i| data.rhos[i].clone())
        .collect();
    let train_labels: Vec<usize> = data.train_idx.iter().map(|&i| data.labels[i]).collect();
    let test_rhos: Vec<DensityMatrix> = data
        .test_idx
        .iter()
        .map(|&i| data.rhos[i].clone())
        .collect();
    let test_labels: Vec<usize> = data.test_idx.iter().map(|&i| data.labels[i]).collect();
    let n_train = train_rhos.len();
    let sizes = SizeSpec::from_options(&cfg.sizes, &cfg.zetas)?.resolve(n_train)?;

    let dist = |i: usize, j: usize| {
        hilbert_schmidt_distance(&train_rhos[i], &train_rhos[j]).expect("uniform dimensions")
    };

    let evaluate = |subset_idx: &[usize],
                    weights: &[u64],
                    delta_c: f64,
                    seed: u64|
     -> Result<(f64, f64, f64, f64)> {
        let sub_rhos: Vec<DensityMatrix> =
            subset_idx.iter().map(|&i| train_rhos[i].clone()).collect();
        let sub_labels: Vec<usize> = subset_idx.iter().map(|&i| train_labels[i]).collect();
        let trainer = TrainConfig {
            seed,
            ..cfg.trainer.clone()
        };
        let started = Instant::now();
        let (model, _) = train_multiclass_density(
            &qnn_cfg,
            &sub_rhos,
            &sub_labels,
            CorrelationClass::COUNT,
            weights,
            &trainer,
        )?;
        let train_ms = started.elapsed().as_secs_f64() * 1e3;

        let mut hits = 0usize;
        for (rho, &label) in test_rhos.iter().zip(test_labels.iter()) {
            if model.predict_density(rho)? == label {
                hits += 1;
            }
        }
        let accuracy = hits as f64 / test_rhos.len() as f64;

        let full_losses: Vec<f64> = train_rhos
            .iter()
            .zip(train_labels.iter())
            .map(|(rho, &l)| ovr_loss(&model, rho, l))
            .collect::<Result<_>>()?;
        let sub_losses: Vec<f64> = sub_rhos
            .iter()
            .zip(sub_labels.iter())
            .map(|(rho, &l)| ovr_loss(&model, rho, l))
            .collect::<Result<_>>()?;
        let cerr = coreset_error(&full_losses, &sub_losses, weights, cfg.trainer.weight_mode)?;

        // Density inputs carry no feature-space encoding, so the
        // Lipschitz product vanishes (max_w = 0) and the coreset term is
        // delta_c * lambda_eta * L * n_c.
        let inputs = BoundInputs {
            n_t: n_train,
            n_c_coreset: subset_idx.len(),
            m: qnn_cfg.n_params(),
            d: qnn_cfg.layers,
            d_x: 16,
            n_classes: CorrelationClass::COUNT,
            delta_c,
            lambda_eta: 1.0,
            loss_bound: 4.0,
            max_w: 0.0,
            norm_m: qnn_cfg.measurement.spectral_norm(),
            max_y: 1.0,
            n_q: 2,
            r: 1.0,
            w_norm: 0.0,
            delta: 0.05,
        };
        let bound = qnn_coreset_bound(&inputs)?;
        Ok((accuracy, train_ms, cerr, bound.sum))
    };

    run_cells(&sizes, cfg.trials, jobs, |size, trial| {
        let seed = trial_seed(cfg.seed, trial);
        let mut out = Vec::with_capacity(2);

        let sel_started = Instant::now();
        let coreset = greedy_k_center_densities(
            &train_rhos,
            &train_labels,
            CorrelationClass::COUNT,
            size,
            seed,
        )?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let (accuracy, train_ms, cerr, bound_sum) = evaluate(
            &coreset.center_indices,
            &coreset.weights,
            coreset.radius,
            seed,
        )?;
        out.push(RunResult {
            task: "correlation".into(),
            selection: Selection::Coreset,
            size: coreset.len(),
            zeta: coreset.prune_rate,
            trial,
            seed,
            accuracy,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: 0.0,
            train_ms: if cfg.record_timings { train_ms } else { 0.0 },
            coreset_error: cerr,
            bound_sum,
        });

        let sel_started = Instant::now();
        let idx =
            random_subset_indices(&train_labels, CorrelationClass::COUNT, size, seed)?;
        let sel_ms = sel_started.elapsed().as_secs_f64() * 1e3;
        let mut radius = 0.0f64;
        for class in 0..CorrelationClass::COUNT {
            radius = radius.max(covering_radius_core(&train_labels, &idx, class, &dist)?);
        }
        let unit = vec![1u64; idx.len()];
        let (accuracy, train_ms, cerr, bound_sum) = evaluate(&idx, &unit, radius, seed)?;
        out.push(RunResult {
            task: "correlation".into(),
            selection: Selection::Random,
            size,
            zeta: size as f64 / n_train as f64,
            trial,
            seed,
            accuracy,
            sel_ms: if cfg.record_timings { sel_ms } else { 0.0 },
            kernel_ms: 0.0,
            train_ms: if cfg.record_timings { train_ms } else { 0.0 },
            coreset_error: cerr,
            bound_sum,
        });
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qnn::{GradientMode, InitMode};

    fn small_config() -> CorrelationBenchConfig {
        CorrelationBenchConfig {
            model: "qnn".into(),
            n_train: 60,
            n_test: 20,
            qnn_layers: 2,
            entangler: Entangler::Ring,
            trainer: TrainConfig {
                learning_rate: 0.3,
                max_epochs: 4,
                seed: 0,
                weight_mode: WeightMode::Normalized,
                gradient_mode: GradientMode::ParameterShift,
                init: InitMode::Uniform,
                full_batch: false,
            },
            sizes: Some(vec![16]),
            zetas: None,
            trials: 1,
            seed: 11,
            record_timings: false,
        }
    }

    #[test]
    fn runs_and_reports_both_selections() {
        let cfg = small_config();
        let results = run_correlation(&cfg, 1).unwrap();
        assert_eq!(results.len(), 2);
        for r in &results {
            assert!(r.accuracy >= 0.0 && r.accuracy <= 1.0);
            assert!(r.bound_sum > 0.0);
            assert_eq!(r.task, "correlation");
        }
        assert_eq!(results[0].selection, Selection::Coreset);
        assert_eq!(results[1].selection, Selection::Random);
    }

    #[test]
    fn deterministic_run() {
        let cfg = small_config();
        let a = run_correlation(&cfg, 1).unwrap();
        let b = run_correlation(&cfg, 1).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        super::super::write_results_csv(&mut buf_a, &a).unwrap();
        super::super::write_results_csv(&mut buf_b, &b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn wrong_model_rejected() {
        let mut cfg = small_config();
        cfg.model = "qkernel-svm".into();
        assert!(run_correlation(&cfg, 1).is_err());
    }
}
