//! Data-reuploading quantum neural network.
//!
//! The circuit alternates, per layer, a feature-encoding wall of
//! single-qubit rotations with angles `w_ij * x_j` (features assigned
//! round-robin when there are fewer features than qubits), a variational
//! wall with one trainable angle per qubit, and a fixed CNOT entangler.
//! The model output is the expectation of the configured measurement
//! operator, so predictions always lie inside its spectral bounds.
//!
//! For density-matrix inputs the encoding is skipped (the input is
//! already a quantum state) and the circuit is the variational walls and
//! entanglers only.
//!
//! Gradients use the parameter-shift rule, valid because every trainable
//! gate is a half-angle Pauli rotation; a central-difference fallback is
//! kept both as a user-selectable mode and as the test oracle.

mod compiler;
mod multiclass;
mod train;

pub use compiler::{
    compile_loss, compile_success_fraction, train_compiler, CompilerAnsatz, COMPILE_SUCCESS_THRESHOLD,
};
pub use multiclass::{argmax, train_multiclass, train_multiclass_density, MulticlassQnn};
pub use train::{
    train_qnn, train_qnn_density, EpochRecord, GradientMode, InitMode, TrainConfig, TrainReport,
};

use serde::{Deserialize, Serialize};

use crate::coreset::{weighted_mean, WeightMode};
use crate::error::{Error, Result};
use crate::qsim::{DensityMatrix, GateKind, GateOp, Observable, StateVector};

/// Pauli axis generating both the encoding and variational rotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingAxis {
    X,
    Y,
    Z,
}

impl EncodingAxis {
    fn rotation_kind(self) -> GateKind {
        match self {
            EncodingAxis::X => GateKind::RX,
            EncodingAxis::Y => GateKind::RY,
            EncodingAxis::Z => GateKind::RZ,
        }
    }
}

/// Fixed CNOT pattern closing each layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    Ring,
    Line,
}

impl Entangler {
    /// CNOT pairs (control, target) for an n-qubit register.
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        if n_qubits < 2 {
            return Vec::new();
        }
        match self {
            Entangler::Line => (0..n_qubits - 1).map(|q| (q, q + 1)).collect(),
            Entangler::Ring => (0..n_qubits).map(|q| (q, (q + 1) % n_qubits)).collect(),
        }
    }
}

/// Architecture of the reuploading model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuploadConfig {
    pub n_qubits: usize,
    pub layers: usize,
    pub encoding_axis: EncodingAxis,
    pub entangler: Entangler,
    /// Per-layer, per-qubit encoding weights (layers x n_qubits).
    pub encoding_weights: Vec<Vec<f64>>,
    /// When set, the encoding weights are appended to the trainable
    /// parameter vector.
    pub trainable_encoding: bool,
    pub measurement: Observable,
}

impl ReuploadConfig {
    /// Y-axis encoding, ring entangler, unit weights, Z on qubit 0.
    pub fn standard(n_qubits: usize, layers: usize) -> Result<Self> {
        let cfg = ReuploadConfig {
            n_qubits,
            layers,
            encoding_axis: EncodingAxis::Y,
            entangler: Entangler::Ring,
            encoding_weights: vec![vec![1.0; n_qubits]; layers],
            trainable_encoding: false,
            measurement: Observable::z_on(0, n_qubits)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers < 1 {
            return Err(Error::invalid("at least one layer required"));
        }
        if self.n_qubits < 1 {
            return Err(Error::invalid("at least one qubit required"));
        }
        if self.measurement.n_qubits() != self.n_qubits {
            return Err(Error::DimMismatch {
                expected: self.n_qubits,
                got: self.measurement.n_qubits(),
            });
        }
        if self.encoding_weights.len() != self.layers
            || self.encoding_weights.iter().any(|r| r.len() != self.n_qubits)
        {
            return Err(Error::invalid(
                "encoding_weights must be a layers x n_qubits matrix",
            ));
        }
        if self
            .encoding_weights
            .iter()
            .flatten()
            .any(|w| !w.is_finite())
        {
            return Err(Error::invalid("encoding weights must be finite"));
        }
        Ok(())
    }

    /// Number of variational angles.
    pub fn n_var_params(&self) -> usize {
        self.layers * self.n_qubits
    }

    /// Total trainable parameter count m.
    pub fn n_params(&self) -> usize {
        if self.trainable_encoding {
            2 * self.n_var_params()
        } else {
            self.n_var_params()
        }
    }

    /// Largest |w_ij|, the `max_w` of the bound evaluators.
    pub fn max_encoding_weight(&self, params: &QnnParams) -> f64 {
        let flat = self.effective_encoding(params);
        flat.iter().fold(0.0f64, |acc, w| acc.max(w.abs()))
    }

    /// Flattened encoding weights in effect: the trainable tail of the
    /// parameter vector, or the configured constants.
    fn effective_encoding<'a>(&'a self, params: &'a QnnParams) -> std::borrow::Cow<'a, [f64]> {
        if self.trainable_encoding {
            std::borrow::Cow::Borrowed(&params.theta[self.n_var_params()..])
        } else {
            std::borrow::Cow::Owned(self.encoding_weights.iter().flatten().copied().collect())
        }
    }
}

/// The trainable parameter vector: variational angles, then (when the
/// encoding is trainable) the flattened encoding weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnnParams {
    pub theta: Vec<f64>,
}

impl QnnParams {
    pub fn zeros(cfg: &ReuploadConfig) -> Self {
        let mut theta = vec![0.0; cfg.n_params()];
        if cfg.trainable_encoding {
            let n_var = cfg.n_var_params();
            for (slot, w) in cfg.encoding_weights.iter().flatten().enumerate() {
                theta[n_var + slot] = *w;
            }
        }
        QnnParams { theta }
    }

    pub fn from_vec(cfg: &ReuploadConfig, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != cfg.n_params() {
            return Err(Error::DimMismatch {
                expected: cfg.n_params(),
                got: theta.len(),
            });
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        Ok(QnnParams { theta })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }
}

/// Which single angle is shifted during a gradient evaluation.
#[derive(Clone, Copy)]
enum Shift {
    None,
    /// Variational slot, additive shift.
    Var(usize, f64),
    /// Encoding slot (layer-major), additive shift applied to the bound
    /// angle w*x.
    Enc(usize, f64),
}

fn run_circuit(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    x: &[f64],
    shift: Shift,
) -> Result<StateVector> {
    if x.is_empty() || x.len() > cfg.n_qubits {
        return Err(Error::invalid(format!(
            "feature count {} outside 1..={}",
            x.len(),
            cfg.n_qubits
        )));
    }
    let kind = cfg.encoding_axis.rotation_kind();
    let n = cfg.n_qubits;
    let n_var = cfg.n_var_params();
    if params.len() != cfg.n_params() {
        return Err(Error::DimMismatch {
            expected: cfg.n_params(),
            got: params.len(),
        });
    }
    let enc = cfg.effective_encoding(params);
    let var = &params.theta[..n_var];

    let mut state = StateVector::zero(n)?;
    for layer in 0..cfg.layers {
        for q in 0..n {
            let slot = layer * n + q;
            let mut angle = enc[slot] * x[q % x.len()];
            if let Shift::Enc(s, delta) = shift {
                if s == slot {
                    angle += delta;
                }
            }
            state.apply_rotation(kind, q, angle)?;
        }
        for q in 0..n {
            let slot = layer * n + q;
            let mut angle = var[slot];
            if let Shift::Var(s, delta) = shift {
                if s == slot {
                    angle += delta;
                }
            }
            state.apply_rotation(kind, q, angle)?;
        }
        for (c, t) in cfg.entangler.pairs(n) {
            state.apply_cnot(c, t)?;
        }
    }
    Ok(state)
}

/// Model output <M> for a classical feature vector.
pub fn qnn_forward(cfg: &ReuploadConfig, params: &QnnParams, x: &[f64]) -> Result<f64> {
    let state = run_circuit(cfg, params, x, Shift::None)?;
    cfg.measurement.expectation(&state)
}

fn forward_shifted(cfg: &ReuploadConfig, params: &QnnParams, x: &[f64], shift: Shift) -> Result<f64> {
    let state = run_circuit(cfg, params, x, shift)?;
    cfg.measurement.expectation(&state)
}

/// Mean-square-error loss.
pub fn qnn_loss(pred: f64, y: f64) -> f64 {
    (pred - y) * (pred - y)
}

/// (prediction, d<M>/d theta_k) by the parameter-shift rule.
pub fn grad_expectation(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let pred = qnn_forward(cfg, params, x)?;
    let n_var = cfg.n_var_params();
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut grad = Vec::with_capacity(cfg.n_params());
    for slot in 0..n_var {
        let plus = forward_shifted(cfg, params, x, Shift::Var(slot, half_pi))?;
        let minus = forward_shifted(cfg, params, x, Shift::Var(slot, -half_pi))?;
        grad.push(0.5 * (plus - minus));
    }
    if cfg.trainable_encoding {
        let n = cfg.n_qubits;
        for slot in 0..n_var {
            let q = slot % n;
            let xj = x[q % x.len()];
            let plus = forward_shifted(cfg, params, x, Shift::Enc(slot, half_pi))?;
            let minus = forward_shifted(cfg, params, x, Shift::Enc(slot, -half_pi))?;
            // d<M>/dw = x_j * d<M>/d(angle).
            grad.push(xj * 0.5 * (plus - minus));
        }
    }
    Ok((pred, grad))
}

/// (prediction, d loss/d theta_k) for the MSE loss: chain rule over the
/// parameter-shift expectation gradient.
pub fn parameter_shift_grad(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    x: &[f64],
    y: f64,
) -> Result<(f64, Vec<f64>)> {
    let (pred, mut grad) = grad_expectation(cfg, params, x)?;
    let scale = 2.0 * (pred - y);
    for g in grad.iter_mut() {
        *g *= scale;
    }
    Ok((pred, grad))
}

/// Central finite differences on the parameter vector; the oracle for the
/// shift rule and the `finite-difference` gradient mode.
pub fn finite_diff_grad(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    x: &[f64],
    y: f64,
    h: f64,
) -> Result<(f64, Vec<f64>)> {
    let pred = qnn_forward(cfg, params, x)?;
    let mut grad = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let mut plus = params.clone();
        plus.theta[k] += h;
        let mut minus = params.clone();
        minus.theta[k] -= h;
        let fp = qnn_loss(qnn_forward(cfg, &plus, x)?, y);
        let fm = qnn_loss(qnn_forward(cfg, &minus, x)?, y);
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok((pred, grad))
}

/// Weighted empirical risk over explicit samples.
pub fn weighted_risk(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    features: ndarray::ArrayView2<'_, f64>,
    ys: &[f64],
    weights: &[u64],
    mode: WeightMode,
) -> Result<f64> {
    if features.nrows() == 0 {
        return Err(Error::invalid("empty sample set"));
    }
    if features.nrows() != ys.len() {
        return Err(Error::DimMismatch {
            expected: features.nrows(),
            got: ys.len(),
        });
    }
    let losses: Vec<f64> = features
        .rows()
        .into_iter()
        .zip(ys.iter())
        .map(|(row, &y)| {
            qnn_forward(cfg, params, row.to_slice().expect("contiguous rows"))
                .map(|p| qnn_loss(p, y))
        })
        .collect::<Result<_>>()?;
    weighted_mean(&losses, weights, mode)
}

/// Variational-only gate list for density inputs.
fn variational_gates(cfg: &ReuploadConfig, var: &[f64], shift: Shift) -> Vec<GateOp> {
    let kind = cfg.encoding_axis.rotation_kind();
    let n = cfg.n_qubits;
    let mut gates = Vec::new();
    for layer in 0..cfg.layers {
        for q in 0..n {
            let slot = layer * n + q;
            let mut angle = var[slot];
            if let Shift::Var(s, delta) = shift {
                if s == slot {
                    angle += delta;
                }
            }
            gates.push(GateOp::with_fixed_angle(kind, vec![q], angle));
        }
        for (c, t) in cfg.entangler.pairs(n) {
            gates.push(GateOp::cnot(c, t));
        }
    }
    gates
}

fn density_check(cfg: &ReuploadConfig, params: &QnnParams, rho: &DensityMatrix) -> Result<()> {
    if cfg.trainable_encoding {
        return Err(Error::invalid(
            "density inputs skip the encoding; trainable encoding weights do not apply",
        ));
    }
    if rho.n_qubits() != cfg.n_qubits {
        return Err(Error::DimMismatch {
            expected: 1 << cfg.n_qubits,
            got: rho.dim(),
        });
    }
    if params.len() != cfg.n_var_params() {
        return Err(Error::DimMismatch {
            expected: cfg.n_var_params(),
            got: params.len(),
        });
    }
    Ok(())
}

/// tr(M U rho U^dag) with the variational circuit only.
pub fn qnn_forward_density(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    rho: &DensityMatrix,
) -> Result<f64> {
    density_check(cfg, params, rho)?;
    let gates = variational_gates(cfg, &params.theta, Shift::None);
    let evolved = crate::qsim::evolve_density(rho, &gates)?;
    cfg.measurement.expectation_density(&evolved)
}

/// (prediction, d<M>/d theta) for a density input.
pub fn grad_expectation_density(
    cfg: &ReuploadConfig,
    params: &QnnParams,
    rho: &DensityMatrix,
) -> Result<(f64, Vec<f64>)> {
    density_check(cfg, params, rho)?;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pred = qnn_forward_density(cfg, params, rho)?;
    let mut grad = Vec::with_capacity(params.len());
    for slot in 0..params.len() {
        let gp = variational_gates(cfg, &params.theta, Shift::Var(slot, half_pi));
        let gm = variational_gates(cfg, &params.theta, Shift::Var(slot, -half_pi));
        let plus = cfg
            .measurement
            .expectation_density(&crate::qsim::evolve_density(rho, &gp)?)?;
        let minus = cfg
            .measurement
            .expectation_density(&crate::qsim::evolve_density(rho, &gm)?)?;
        grad.push(0.5 * (plus - minus));
    }
    Ok((pred, grad))
}

/// Serialized model checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QnnCheckpoint {
    pub config: ReuploadConfig,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
    pub epoch: usize,
    pub loss_trace: Vec<f64>,
}

impl QnnCheckpoint {
    pub fn new(cfg: &ReuploadConfig, params: &QnnParams, report: &TrainReport) -> Self {
        let n_var = cfg.n_var_params();
        QnnCheckpoint {
            config: cfg.clone(),
            theta: params.theta[..n_var].to_vec(),
            w: cfg.effective_encoding(params).to_vec(),
            epoch: report.loss_trace.len(),
            loss_trace: report.loss_trace.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn one_qubit_cfg() -> ReuploadConfig {
        ReuploadConfig::standard(1, 1).unwrap()
    }

    #[test]
    fn identity_limit_all_zero() {
        let cfg = ReuploadConfig::standard(3, 2).unwrap();
        let params = QnnParams::zeros(&cfg);
        let out = qnn_forward(&cfg, &params, &[0.0, 0.0, 0.0]).unwrap();
        assert!((out - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_qubit_closed_form() {
        // d=1, w=1, axis Y, M=Z, theta=0: <Z> = cos(w x).
        let cfg = one_qubit_cfg();
        let params = QnnParams::zeros(&cfg);
        let out = qnn_forward(&cfg, &params, &[PI]).unwrap();
        assert!((out - (-1.0)).abs() < 1e-12, "got {out}");
        for x in [0.3, 1.1, 2.0] {
            let out = qnn_forward(&cfg, &params, &[x]).unwrap();
            assert!((out - x.cos()).abs() < 1e-12);
        }
        // With theta too, <Z> = cos(w x + theta).
        let params = QnnParams::from_vec(&cfg, vec![0.4]).unwrap();
        let out = qnn_forward(&cfg, &params, &[0.9]).unwrap();
        assert!((out - (0.9f64 + 0.4).cos()).abs() < 1e-12);
    }

    #[test]
    fn output_bounded_by_spectral_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = ReuploadConfig::standard(3, 2).unwrap();
        for _ in 0..20 {
            let theta: Vec<f64> = (0..cfg.n_params())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            let params = QnnParams::from_vec(&cfg, theta).unwrap();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..PI)).collect();
            let out = qnn_forward(&cfg, &params, &x).unwrap();
            assert!(out.abs() <= cfg.measurement.spectral_norm() + 1e-12);
        }
    }

    #[test]
    fn loss_values() {
        assert_eq!(qnn_loss(1.0, 1.0), 0.0);
        assert_eq!(qnn_loss(-1.0, 1.0), 4.0);
        assert!((qnn_loss(0.25, -0.5) - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn identity_observable_zero_gradient() {
        let mut cfg = ReuploadConfig::standard(2, 2).unwrap();
        cfg.measurement = Observable::identity(2).unwrap();
        let params = QnnParams::from_vec(&cfg, vec![0.3, -0.7, 1.1, 0.2]).unwrap();
        let (_, grad) = grad_expectation(&cfg, &params, &[0.5, 0.8]).unwrap();
        for g in grad {
            assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn closed_form_gradient_ry() {
        // 1 qubit, x=0: <Z> = cos(theta); gradient -sin(theta).
        let cfg = one_qubit_cfg();
        let params = QnnParams::from_vec(&cfg, vec![PI / 2.0]).unwrap();
        let (_, grad) = grad_expectation(&cfg, &params, &[0.0]).unwrap();
        assert!((grad[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_rule_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for trial in 0..8 {
            let n = rng.random_range(1..=3);
            let d = rng.random_range(1..=3);
            let mut cfg = ReuploadConfig::standard(n, d).unwrap();
            cfg.trainable_encoding = trial % 2 == 0;
            let theta: Vec<f64> = (0..cfg.n_params())
                .map(|_| rng.random_range(-PI..PI))
                .collect();
            let params = QnnParams::from_vec(&cfg, theta).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..PI)).collect();
            let y = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let (_, shift) = parameter_shift_grad(&cfg, &params, &x, y).unwrap();
            let (_, fd) = finite_diff_grad(&cfg, &params, &x, y, 1e-5).unwrap();
            for (a, b) in shift.iter().zip(fd.iter()) {
                assert!((a - b).abs() < 1e-6, "trial {trial}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn weighted_risk_reductions() {
        let cfg = one_qubit_cfg();
        let params = QnnParams::zeros(&cfg);
        let features = ndarray::Array2::from_shape_vec((2, 1), vec![0.0, PI]).unwrap();
        let ys = vec![1.0, 1.0];
        // Predictions are (1, -1), losses (0, 4).
        let plain = weighted_risk(
            &cfg,
            &params,
            features.view(),
            &ys,
            &[1, 1],
            WeightMode::Normalized,
        )
        .unwrap();
        assert!((plain - 2.0).abs() < 1e-12);
        // Paper mode with gamma = (3, 1): (3*0 + 1*4)/2 = 2.
        let paper =
            weighted_risk(&cfg, &params, features.view(), &ys, &[3, 1], WeightMode::Paper)
                .unwrap();
        assert!((paper - 2.0).abs() < 1e-12);
        // Single sample: its own loss regardless of gamma.
        let single = weighted_risk(
            &cfg,
            &params,
            features.slice(ndarray::s![..1, ..]),
            &ys[..1],
            &[7],
            WeightMode::Normalized,
        )
        .unwrap();
        assert!(single.abs() < 1e-12);
    }

    #[test]
    fn density_path_matches_statevector_on_pure_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut cfg = ReuploadConfig::standard(2, 2).unwrap();
        cfg.encoding_weights = vec![vec![0.0; 2]; 2]; // zero encoding angles
        let theta: Vec<f64> = (0..cfg.n_params())
            .map(|_| rng.random_range(-PI..PI))
            .collect();
        let params = QnnParams::from_vec(&cfg, theta).unwrap();

        // With zero encoding the statevector path applies the same
        // variational circuit to |00>.
        let rho = DensityMatrix::from_pure(&StateVector::zero(2).unwrap()).unwrap();
        let via_density = qnn_forward_density(&cfg, &params, &rho).unwrap();
        let via_state = qnn_forward(&cfg, &params, &[0.0, 0.0]).unwrap();
        assert!((via_density - via_state).abs() < 1e-10);
    }

    #[test]
    fn density_gradient_matches_shifted_values() {
        let cfg = ReuploadConfig::standard(2, 1).unwrap();
        let params = QnnParams::from_vec(&cfg, vec![0.4, -0.8]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let (pred, grad) = grad_expectation_density(&cfg, &params, &rho).unwrap();
        // Maximally mixed input is invariant, so every output is 0.
        assert!(pred.abs() < 1e-12);
        for g in grad {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn density_trainable_encoding_rejected() {
        let mut cfg = ReuploadConfig::standard(2, 1).unwrap();
        cfg.trainable_encoding = true;
        let params = QnnParams::zeros(&cfg);
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(qnn_forward_density(&cfg, &params, &rho).is_err());
    }

    #[test]
    fn param_count_bookkeeping() {
        let mut cfg = ReuploadConfig::standard(3, 2).unwrap();
        assert_eq!(cfg.n_params(), 6);
        cfg.trainable_encoding = true;
        assert_eq!(cfg.n_params(), 12);
        let params = QnnParams::zeros(&cfg);
        assert_eq!(params.len(), 12);
        let (_, grad) = grad_expectation(&cfg, &params, &[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(grad.len(), 12);
    }

    #[test]
    fn feature_round_robin() {
        // 3 qubits, 2 features: qubit 2 reuses feature 0.
        let cfg = ReuploadConfig::standard(3, 1).unwrap();
        let params = QnnParams::zeros(&cfg);
        let a = qnn_forward(&cfg, &params, &[0.7, 0.2]).unwrap();
        let b = qnn_forward(&cfg, &params, &[0.7, 0.2, 0.7]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ReuploadConfig::standard(2, 3).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ReuploadConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }
}
