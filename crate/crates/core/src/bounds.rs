//! Computable generalization-bound evaluators for models trained on
//! coresets, reported term by term with unit big-O constants.
//!
//! The hidden constants of the source bounds are not recoverable, so every
//! report is labeled as a relative scale: the numbers support comparisons
//! across coreset sizes and architectures, not absolute error claims.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coreset::Coreset;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::qkernel::FeatureMapConfig;
use crate::qnn::{QnnParams, ReuploadConfig};
use crate::wsvm::SvmModel;

pub const SCALE_NOTE: &str = "relative scale - valid for comparisons only";

/// Everything the bound evaluators consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInputs {
    /// Full training-set size.
    pub n_t: usize,
    /// Coreset size.
    pub n_c_coreset: usize,
    /// Trainable parameter count.
    pub m: usize,
    /// Circuit layers.
    pub d: usize,
    /// Feature dimension.
    pub d_x: usize,
    /// Class count.
    pub n_classes: usize,
    /// Covering radius of the coreset.
    pub delta_c: f64,
    /// Lipschitz constant of the class-specific regression function;
    /// unidentifiable from data, defaults to 1.
    pub lambda_eta: f64,
    /// Loss bound L.
    pub loss_bound: f64,
    /// Largest |w_j| (encoding weights for the QNN, hypothesis weights
    /// alpha_i y_i for the kernel machine).
    pub max_w: f64,
    /// Spectral norm of the measurement operator.
    pub norm_m: f64,
    /// Largest |label value|.
    pub max_y: f64,
    /// Qubit count of the mapped state.
    pub n_q: usize,
    /// Largest feature value.
    pub r: f64,
    /// ||w|| of the kernel hypothesis.
    pub w_norm: f64,
    /// Confidence parameter in (0, 1).
    pub delta: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        if self.n_c_coreset < 1 || self.n_t < self.n_c_coreset {
            return Err(Error::invalid("need N_t >= N_c >= 1"));
        }
        if self.m < 1 || self.n_q < 1 || self.d < 1 {
            return Err(Error::invalid("m, d, and N_q must be at least 1"));
        }
        for (name, v) in [
            ("delta_c", self.delta_c),
            ("lambda_eta", self.lambda_eta),
            ("loss_bound", self.loss_bound),
            ("max_w", self.max_w),
            ("norm_m", self.norm_m),
            ("max_y", self.max_y),
            ("r", self.r),
            ("w_norm", self.w_norm),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Lipschitz constant of the reuploading-QNN loss in feature space:
/// 2 d sqrt(d_x) max|w| |M| (|M| + max|y|).
pub fn qnn_lipschitz(d: usize, d_x: usize, max_w: f64, norm_m: f64, max_y: f64) -> f64 {
    2.0 * d as f64 * (d_x as f64).sqrt() * max_w * norm_m * (norm_m + max_y)
}

/// Lipschitz constant of the clipped kernel-hypothesis loss:
/// 2 k_c sqrt(d_x) max|w| (1 + (N_q - 1) r).
pub fn kernel_lipschitz(k_c: usize, d_x: usize, max_w: f64, n_q: usize, r: f64) -> f64 {
    2.0 * k_c as f64 * (d_x as f64).sqrt() * max_w * (1.0 + (n_q as f64 - 1.0) * r)
}

/// A bound broken into its capacity, confidence, and coreset terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub capacity: f64,
    pub confidence: f64,
    pub coreset_term: f64,
    pub sum: f64,
    pub inputs: BoundInputs,
    /// Per-field origin: "measured", "supplied", or "default".
    pub provenance: BTreeMap<String, String>,
    pub note: String,
}

impl BoundReport {
    fn assemble(
        capacity: f64,
        confidence: f64,
        coreset_term: f64,
        inputs: &BoundInputs,
    ) -> BoundReport {
        BoundReport {
            capacity,
            confidence,
            coreset_term,
            sum: capacity + confidence + coreset_term,
            inputs: inputs.clone(),
            provenance: BTreeMap::new(),
            note: SCALE_NOTE.to_string(),
        }
    }

    pub fn with_provenance(mut self, provenance: BTreeMap<String, String>) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Generalization bound of a QNN trained on a coreset, with unit
/// constants and natural logarithms. log(m) is floored at 1 so the
/// capacity term stays monotone down to m = 1.
pub fn qnn_coreset_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let n_t = inputs.n_t as f64;
    let m = inputs.m as f64;
    let capacity = (m * m.ln().max(1.0) / n_t).sqrt();
    let confidence = ((1.0 / inputs.delta).ln() / n_t).sqrt();
    let coreset_term = inputs.delta_c
        * (inputs.lambda_eta * inputs.loss_bound * inputs.n_classes as f64
            + qnn_lipschitz(
                inputs.d,
                inputs.d_x,
                inputs.max_w,
                inputs.norm_m,
                inputs.max_y,
            ));
    Ok(BoundReport::assemble(
        capacity,
        confidence,
        coreset_term,
        inputs,
    ))
}

/// Generalization bound of a quantum-kernel SVM trained on a coreset.
pub fn qkernel_coreset_bound(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let n_t = inputs.n_t as f64;
    let w_ceil = inputs.w_norm.ceil();
    let capacity = (w_ceil * w_ceil / n_t).sqrt();
    let confidence = ((4.0 / inputs.delta).ln() / n_t).sqrt();
    let coreset_term = inputs.delta_c
        * (inputs.lambda_eta * inputs.loss_bound * inputs.n_classes as f64
            + inputs.n_c_coreset as f64
                * (inputs.d_x as f64).sqrt()
                * inputs.max_w
                * (1.0 + (inputs.n_q as f64 - 1.0) * inputs.r));
    Ok(BoundReport::assemble(
        capacity,
        confidence,
        coreset_term,
        inputs,
    ))
}

/// Which trained artifact the inputs are measured from.
pub enum ModelSetup<'a> {
    Qnn {
        cfg: &'a ReuploadConfig,
        params: &'a QnnParams,
        max_y: f64,
    },
    QuantumKernelSvm {
        cfg: &'a FeatureMapConfig,
        model: &'a SvmModel,
    },
}

/// Extract every measurable bound input from live artifacts. The
/// regression-function constant `lambda_eta` and the loss bound stay
/// caller-supplied (defaults: 1 and, for the QNN's MSE,
/// (|M| + max|y|)^2; 2 for the clipped kernel loss).
pub fn measure_bound_inputs(
    setup: &ModelSetup<'_>,
    coreset: &Coreset,
    ds: &LabeledDataset,
    delta: f64,
    lambda_eta: Option<f64>,
    loss_bound: Option<f64>,
) -> Result<(BoundInputs, BTreeMap<String, String>)> {
    let mut prov = BTreeMap::new();
    let tag = |prov: &mut BTreeMap<String, String>, name: &str, origin: &str| {
        prov.insert(name.to_string(), origin.to_string());
    };

    let n_t = ds.n_rows();
    let n_c_coreset = coreset.len();
    if n_c_coreset > n_t {
        return Err(Error::invalid("coreset larger than dataset"));
    }
    let r = ds.max_feature().max(0.0);
    for name in ["n_t", "n_c_coreset", "delta_c", "d_x", "n_classes", "r"] {
        tag(&mut prov, name, "measured");
    }
    tag(&mut prov, "delta", "supplied");

    let lambda_eta_v = lambda_eta.unwrap_or(1.0);
    tag(
        &mut prov,
        "lambda_eta",
        if lambda_eta.is_some() { "supplied" } else { "default" },
    );

    let inputs = match setup {
        ModelSetup::Qnn { cfg, params, max_y } => {
            let norm_m = cfg.measurement.spectral_norm();
            let max_w = cfg.max_encoding_weight(params);
            let loss_default = (norm_m + max_y) * (norm_m + max_y);
            let loss_v = loss_bound.unwrap_or(loss_default);
            for name in ["m", "d", "max_w", "norm_m", "n_q"] {
                tag(&mut prov, name, "measured");
            }
            tag(&mut prov, "max_y", "supplied");
            tag(
                &mut prov,
                "loss_bound",
                if loss_bound.is_some() { "supplied" } else { "default" },
            );
            tag(&mut prov, "w_norm", "default");
            BoundInputs {
                n_t,
                n_c_coreset,
                m: cfg.n_params(),
                d: cfg.layers,
                d_x: ds.dim(),
                n_classes: ds.n_classes(),
                delta_c: coreset.radius,
                lambda_eta: lambda_eta_v,
                loss_bound: loss_v,
                max_w,
                norm_m,
                max_y: *max_y,
                n_q: cfg.n_qubits,
                r,
                w_norm: 0.0,
                delta,
            }
        }
        ModelSetup::QuantumKernelSvm { cfg, model } => {
            // Hypothesis weights are alpha_i y_i.
            let max_w = model.alpha.iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
            let w_norm = model.alpha.iter().map(|a| a * a).sum::<f64>().sqrt();
            let loss_v = loss_bound.unwrap_or(2.0);
            for name in ["max_w", "w_norm", "n_q"] {
                tag(&mut prov, name, "measured");
            }
            tag(
                &mut prov,
                "loss_bound",
                if loss_bound.is_some() { "supplied" } else { "default" },
            );
            for name in ["m", "d", "norm_m", "max_y"] {
                tag(&mut prov, name, "default");
            }
            BoundInputs {
                n_t,
                n_c_coreset,
                m: 1,
                d: 1,
                d_x: ds.dim(),
                n_classes: ds.n_classes(),
                delta_c: coreset.radius,
                lambda_eta: lambda_eta_v,
                loss_bound: loss_v,
                max_w,
                norm_m: 1.0,
                max_y: 1.0,
                n_q: cfg.n_qubits,
                r,
                w_norm,
                delta,
            }
        }
    };
    inputs.validate()?;
    Ok((inputs, prov))
}
