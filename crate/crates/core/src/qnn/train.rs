//! Weighted per-sample gradient-descent trainer.
//!
//! One epoch is one pass over the samples in seeded shuffled order, with
//! the update `theta <- theta - eta * gamma_j * grad l_j` (gamma
//! normalized so the learning rate keeps a dataset-size-independent
//! meaning). A full-batch mode averages the weighted gradients into a
//! single step per epoch for deterministic closed-form tests.

use std::io::Write;
use std::time::Instant;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    finite_diff_grad, parameter_shift_grad, qnn_forward_density, qnn_loss, QnnParams,
    ReuploadConfig,
};
use crate::coreset::{weighted_mean, WeightMode};
use crate::error::{Error, Result};
use crate::qsim::DensityMatrix;

/// Loss guard: abort when the weighted risk exceeds this.
pub const DIVERGENCE_GUARD: f64 = 1e6;

/// Epoch-to-epoch improvement below this stops training.
pub const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    #[default]
    ParameterShift,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    Zeros,
    /// Uniform(-pi, pi), seeded.
    #[default]
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
    #[serde(default)]
    pub weight_mode: WeightMode,
    #[serde(default)]
    pub gradient_mode: GradientMode,
    #[serde(default)]
    pub init: InitMode,
    /// Average the weighted gradients into one step per epoch.
    #[serde(default)]
    pub full_batch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_epochs: 100,
            seed: 0,
            weight_mode: WeightMode::Normalized,
            gradient_mode: GradientMode::ParameterShift,
            init: InitMode::Uniform,
            full_batch: false,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be finite and >= 0"));
        }
        if self.max_epochs < 1 {
            return Err(Error::invalid("max_epochs must be at least 1"));
        }
        Ok(())
    }
}

/// Per-epoch trainer telemetry (one CSV row each).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub weighted_risk: f64,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

/// Outcome of a training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    /// Weighted risk after each completed epoch.
    pub loss_trace: Vec<f64>,
    /// Final parameter vector.
    pub params: Vec<f64>,
    pub wall_ms: f64,
    /// Number of per-sample gradient evaluations.
    pub grad_evals: usize,
    pub epochs: Vec<EpochRecord>,
    /// Fraction of held-out pairs compiled below the trace-distance
    /// threshold; set by the unitary compiler only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compile_success: Option<f64>,
}

impl TrainReport {
    pub fn final_risk(&self) -> Option<f64> {
        self.loss_trace.last().copied()
    }

    /// CSV: epoch, weighted_risk, grad_norm, wall_ms.
    pub fn write_epoch_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "epoch,weighted_risk,grad_norm,wall_ms")?;
        for r in &self.epochs {
            writeln!(
                w,
                "{},{},{},{}",
                r.epoch, r.weighted_risk, r.grad_norm, r.wall_ms
            )?;
        }
        Ok(())
    }
}

/// A differentiable per-sample objective the SGD loop can drive.
pub(crate) trait SgdProblem {
    fn n_samples(&self) -> usize;
    fn loss(&self, params: &[f64], idx: usize) -> Result<f64>;
    fn loss_grad(&self, params: &[f64], idx: usize, mode: GradientMode) -> Result<Vec<f64>>;
}

pub(crate) fn initial_params(n: usize, init: InitMode, seed: u64) -> Vec<f64> {
    match init {
        InitMode::Zeros => vec![0.0; n],
        InitMode::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        }
    }
}

pub(crate) fn run_sgd<P: SgdProblem>(
    problem: &P,
    mut params: Vec<f64>,
    weights: &[u64],
    tcfg: &TrainConfig,
) -> Result<TrainReport> {
    tcfg.validate()?;
    let n = problem.n_samples();
    if n == 0 {
        return Err(Error::invalid("empty training set"));
    }
    if weights.len() != n {
        return Err(Error::DimMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    let weight_sum: u64 = weights.iter().sum();
    if weight_sum == 0 {
        return Err(Error::invalid("weights sum to zero"));
    }
    // Effective per-sample step weights.
    let gamma: Vec<f64> = match tcfg.weight_mode {
        WeightMode::Normalized => weights
            .iter()
            .map(|&g| g as f64 * n as f64 / weight_sum as f64)
            .collect(),
        WeightMode::Paper => weights.iter().map(|&g| g as f64).collect(),
    };

    let risk = |params: &[f64]| -> Result<f64> {
        let losses: Vec<f64> = (0..n)
            .map(|i| problem.loss(params, i))
            .collect::<Result<_>>()?;
        weighted_mean(&losses, weights, tcfg.weight_mode)
    };

    let started = Instant::now();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let mut loss_trace = Vec::new();
    let mut epochs = Vec::new();
    let mut grad_evals = 0usize;
    let mut prev_risk = f64::INFINITY;

    for epoch in 0..tcfg.max_epochs {
        let epoch_start = Instant::now();
        order.shuffle(&mut rng);
        let mut grad_accum = vec![0.0f64; params.len()];

        if tcfg.full_batch {
            for &idx in &order {
                let g = problem.loss_grad(&params, idx, tcfg.gradient_mode)?;
                grad_evals += 1;
                for (acc, gi) in grad_accum.iter_mut().zip(g.iter()) {
                    *acc += gamma[idx] * gi;
                }
            }
            for (p, acc) in params.iter_mut().zip(grad_accum.iter()) {
                *p -= tcfg.learning_rate * *acc / n as f64;
            }
        } else {
            for &idx in &order {
                let g = problem.loss_grad(&params, idx, tcfg.gradient_mode)?;
                grad_evals += 1;
                for ((p, acc), gi) in params.iter_mut().zip(grad_accum.iter_mut()).zip(g.iter()) {
                    *p -= tcfg.learning_rate * gamma[idx] * gi;
                    *acc += gamma[idx] * gi;
                }
            }
        }

        let current = risk(&params)?;
        let grad_norm = (grad_accum.iter().map(|g| g * g).sum::<f64>()).sqrt() / n as f64;
        loss_trace.push(current);
        epochs.push(EpochRecord {
            epoch,
            weighted_risk: current,
            grad_norm,
            wall_ms: epoch_start.elapsed().as_secs_f64() * 1e3,
        });
        if current > DIVERGENCE_GUARD {
            return Err(Error::Diverged(current));
        }
        if prev_risk - current < CONVERGENCE_TOL {
            break;
        }
        prev_risk = current;
    }

    Ok(TrainReport {
        loss_trace,
        params,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
        grad_evals,
        epochs,
        compile_success: None,
    })
}

struct FeatureProblem<'a> {
    cfg: &'a ReuploadConfig,
    features: ArrayView2<'a, f64>,
    ys: &'a [f64],
}

impl SgdProblem for FeatureProblem<'_> {
    fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    fn loss(&self, params: &[f64], idx: usize) -> Result<f64> {
        let p = QnnParams {
            theta: params.to_vec(),
        };
        let row = self.features.row(idx);
        let pred = super::qnn_forward(self.cfg, &p, row.to_slice().expect("contiguous rows"))?;
        Ok(qnn_loss(pred, self.ys[idx]))
    }

    fn loss_grad(&self, params: &[f64], idx: usize, mode: GradientMode) -> Result<Vec<f64>> {
        let p = QnnParams {
            theta: params.to_vec(),
        };
        let row = self.features.row(idx);
        let x = row.to_slice().expect("contiguous rows");
        let (_, grad) = match mode {
            GradientMode::ParameterShift => parameter_shift_grad(self.cfg, &p, x, self.ys[idx])?,
            GradientMode::FiniteDifference => {
                finite_diff_grad(self.cfg, &p, x, self.ys[idx], 1e-5)?
            }
        };
        Ok(grad)
    }
}

/// Train on classical features with +-1 regression targets.
pub fn train_qnn(
    cfg: &ReuploadConfig,
    features: ArrayView2<'_, f64>,
    ys: &[f64],
    weights: &[u64],
    tcfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if features.nrows() != ys.len() {
        return Err(Error::DimMismatch {
            expected: features.nrows(),
            got: ys.len(),
        });
    }
    let mut init = initial_params(cfg.n_params(), tcfg.init, tcfg.seed);
    if cfg.trainable_encoding {
        // The encoding tail starts from the configured weights.
        let n_var = cfg.n_var_params();
        for (slot, w) in cfg.encoding_weights.iter().flatten().enumerate() {
            init[n_var + slot] = *w;
        }
    }
    let problem = FeatureProblem { cfg, features, ys };
    run_sgd(&problem, init, weights, tcfg)
}

struct DensityProblem<'a> {
    cfg: &'a ReuploadConfig,
    rhos: &'a [DensityMatrix],
    ys: &'a [f64],
}

impl SgdProblem for DensityProblem<'_> {
    fn n_samples(&self) -> usize {
        self.rhos.len()
    }

    fn loss(&self, params: &[f64], idx: usize) -> Result<f64> {
        let p = QnnParams {
            theta: params.to_vec(),
        };
        let pred = qnn_forward_density(self.cfg, &p, &self.rhos[idx])?;
        Ok(qnn_loss(pred, self.ys[idx]))
    }

    fn loss_grad(&self, params: &[f64], idx: usize, mode: GradientMode) -> Result<Vec<f64>> {
        let p = QnnParams {
            theta: params.to_vec(),
        };
        match mode {
            GradientMode::ParameterShift => {
                let (pred, mut grad) =
                    super::grad_expectation_density(self.cfg, &p, &self.rhos[idx])?;
                let scale = 2.0 * (pred - self.ys[idx]);
                for g in grad.iter_mut() {
                    *g *= scale;
                }
                Ok(grad)
            }
            GradientMode::FiniteDifference => {
                let h = 1e-5;
                let mut grad = Vec::with_capacity(params.len());
                for k in 0..params.len() {
                    let mut plus = p.clone();
                    plus.theta[k] += h;
                    let mut minus = p.clone();
                    minus.theta[k] -= h;
                    let fp = qnn_loss(
                        qnn_forward_density(self.cfg, &plus, &self.rhos[idx])?,
                        self.ys[idx],
                    );
                    let fm = qnn_loss(
                        qnn_forward_density(self.cfg, &minus, &self.rhos[idx])?,
                        self.ys[idx],
                    );
                    grad.push((fp - fm) / (2.0 * h));
                }
                Ok(grad)
            }
        }
    }
}

/// Train on density-matrix inputs (variational circuit only).
pub fn train_qnn_density(
    cfg: &ReuploadConfig,
    rhos: &[DensityMatrix],
    ys: &[f64],
    weights: &[u64],
    tcfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if cfg.trainable_encoding {
        return Err(Error::invalid(
            "density inputs skip the encoding; trainable encoding weights do not apply",
        ));
    }
    if rhos.len() != ys.len() {
        return Err(Error::DimMismatch {
            expected: rhos.len(),
            got: ys.len(),
        });
    }
    let init = initial_params(cfg.n_var_params(), tcfg.init, tcfg.seed);
    let problem = DensityProblem { cfg, rhos, ys };
    run_sgd(&problem, init, weights, tcfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::Observable;
    use ndarray::Array2;

    fn toy_features() -> (Array2<f64>, Vec<f64>) {
        // Two separable points for a 1-qubit model: x=0 -> +1, x=pi -> -1
        // is already perfect, so use targets that need movement.
        let features = Array2::from_shape_vec((2, 1), vec![0.4, 2.6]).unwrap();
        let ys = vec![1.0, -1.0];
        (features, ys)
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let cfg = ReuploadConfig::standard(1, 1).unwrap();
        let (features, ys) = toy_features();
        let tcfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 5,
            seed: 3,
            init: InitMode::Uniform,
            ..Default::default()
        };
        let report = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg).unwrap();
        let expected = initial_params(cfg.n_params(), InitMode::Uniform, 3);
        assert_eq!(report.params, expected);
        // Loss trace is flat (training stops after the first epoch since
        // improvement is zero).
        assert!(report.loss_trace.len() <= 5);
        let first = report.loss_trace[0];
        for l in &report.loss_trace {
            assert_eq!(*l, first);
        }
    }

    #[test]
    fn training_reduces_weighted_risk() {
        let cfg = ReuploadConfig::standard(1, 1).unwrap();
        let (features, ys) = toy_features();
        let tcfg = TrainConfig {
            learning_rate: 0.1,
            max_epochs: 50,
            seed: 7,
            ..Default::default()
        };
        let initial = {
            let init = initial_params(cfg.n_params(), tcfg.init, tcfg.seed);
            let params = QnnParams { theta: init };
            super::super::weighted_risk(
                &cfg,
                &params,
                features.view(),
                &ys,
                &[1, 1],
                WeightMode::Normalized,
            )
            .unwrap()
        };
        let report = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg).unwrap();
        let final_risk = report.final_risk().unwrap();
        assert!(
            final_risk < initial,
            "final {final_risk} not below initial {initial}"
        );
    }

    #[test]
    fn unit_weights_match_unweighted_trajectory() {
        let cfg = ReuploadConfig::standard(2, 1).unwrap();
        let features =
            Array2::from_shape_vec((4, 2), vec![0.1, 0.5, 2.8, 0.3, 1.5, 2.2, 0.7, 1.9]).unwrap();
        let ys = vec![1.0, -1.0, -1.0, 1.0];
        let tcfg = TrainConfig {
            learning_rate: 0.05,
            max_epochs: 8,
            seed: 5,
            ..Default::default()
        };
        let a = train_qnn(&cfg, features.view(), &ys, &[1, 1, 1, 1], &tcfg).unwrap();
        // Weighted run with all-equal weights > 1 normalizes back to 1.
        let b = train_qnn(&cfg, features.view(), &ys, &[3, 3, 3, 3], &tcfg).unwrap();
        for (x, y) in a.params.iter().zip(b.params.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn divergence_guard_fires() {
        let mut cfg = ReuploadConfig::standard(1, 1).unwrap();
        cfg.measurement =
            Observable::pauli(vec![crate::qsim::Pauli::Z], 2000.0).unwrap();
        let features = Array2::from_shape_vec((1, 1), vec![0.0]).unwrap();
        // Prediction starts near 2000; a target of -2000 puts the MSE at
        // ~1.6e7, beyond the guard.
        let ys = vec![-2000.0];
        let tcfg = TrainConfig {
            learning_rate: 0.0,
            max_epochs: 3,
            seed: 0,
            init: InitMode::Zeros,
            ..Default::default()
        };
        let err = train_qnn(&cfg, features.view(), &ys, &[1], &tcfg).unwrap_err();
        assert!(matches!(err, Error::Diverged(_)));
    }

    #[test]
    fn finite_difference_mode_trains_too() {
        let cfg = ReuploadConfig::standard(1, 1).unwrap();
        let (features, ys) = toy_features();
        let tcfg = TrainConfig {
            learning_rate: 0.1,
            max_epochs: 10,
            seed: 2,
            gradient_mode: GradientMode::FiniteDifference,
            ..Default::default()
        };
        let a = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg).unwrap();
        let tcfg_ps = TrainConfig {
            gradient_mode: GradientMode::ParameterShift,
            ..tcfg
        };
        let b = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg_ps).unwrap();
        // The two modes agree to finite-difference accuracy.
        for (x, y) in a.params.iter().zip(b.params.iter()) {
            assert!((x - y).abs() < 1e-4, "{x} vs {y}");
        }
    }

    #[test]
    fn full_batch_deterministic_descent() {
        let cfg = ReuploadConfig::standard(1, 1).unwrap();
        let (features, ys) = toy_features();
        let tcfg = TrainConfig {
            learning_rate: 0.2,
            max_epochs: 40,
            seed: 1,
            init: InitMode::Zeros,
            full_batch: true,
            ..Default::default()
        };
        let report = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg).unwrap();
        for w in report.loss_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "full-batch loss rose: {w:?}");
        }
    }

    #[test]
    fn density_training_runs() {
        use crate::data::gen_correlation_dataset;
        let cfg = ReuploadConfig::standard(2, 2).unwrap();
        let samples = gen_correlation_dataset(12, 5).unwrap();
        let rhos: Vec<DensityMatrix> = samples.iter().map(|s| s.rho.clone()).collect();
        let ys: Vec<f64> = samples
            .iter()
            .map(|s| if s.p > 0.5 { 1.0 } else { -1.0 })
            .collect();
        let tcfg = TrainConfig {
            learning_rate: 0.2,
            max_epochs: 15,
            seed: 9,
            ..Default::default()
        };
        let report = train_qnn_density(&cfg, &rhos, &ys, &vec![1; 12], &tcfg).unwrap();
        assert!(!report.loss_trace.is_empty());
        assert!(report.grad_evals > 0);
    }

    #[test]
    fn epoch_csv_shape() {
        let cfg = ReuploadConfig::standard(1, 1).unwrap();
        let (features, ys) = toy_features();
        let tcfg = TrainConfig {
            learning_rate: 0.1,
            max_epochs: 3,
            seed: 0,
            ..Default::default()
        };
        let report = train_qnn(&cfg, features.view(), &ys, &[1, 1], &tcfg).unwrap();
        let mut buf = Vec::new();
        report.write_epoch_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epoch,weighted_risk,grad_norm,wall_ms"));
        assert_eq!(text.lines().count(), report.epochs.len() + 1);
    }
}
