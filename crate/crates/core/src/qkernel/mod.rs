//! Quantum feature maps and Gram matrices, plus the classical RBF kernel.
//!
//! The feature map applies `repetitions` blocks of (Hadamard wall, then a
//! diagonal Pauli-Z phase layer) to |0...0>. All terms of the phase layer
//! commute, so it is evaluated by direct phase accumulation per basis
//! state rather than gate by gate; an explicit gate construction is kept
//! in the tests as an equivalence oracle. Kernel entries are statevector
//! overlaps |<x'|x>|^2, identical to tr(rho rho') for pure encodings.

mod cache;

pub use cache::{read_kernel_cache, write_kernel_cache, write_kernel_csv, KernelCache};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::qsim::{overlap_sq, StateVector, STATEVECTOR_QUBIT_CAP};
use crate::relabel::{default_eig_tol, sym_eig};

/// Pairwise-coefficient convention of the diagonal layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMapVariant {
    /// Pairwise coefficients x_i * x_j.
    Product,
    /// Pairwise coefficients (pi - x_i) * (pi - x_j).
    PiShifted,
}

/// Configuration of the quantum feature map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureMapConfig {
    pub n_qubits: usize,
    /// Number of (H wall, diagonal) blocks; 2 is the squared block.
    pub repetitions: usize,
    /// Whether the two-qubit ZZ phases are included.
    pub include_pairwise: bool,
    pub variant: FeatureMapVariant,
}

impl FeatureMapConfig {
    pub fn product(n_qubits: usize) -> Self {
        FeatureMapConfig {
            n_qubits,
            repetitions: 2,
            include_pairwise: true,
            variant: FeatureMapVariant::Product,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(Error::invalid("feature map needs at least 1 qubit"));
        }
        if self.n_qubits > STATEVECTOR_QUBIT_CAP {
            return Err(Error::QubitCap {
                what: "feature map",
                cap: STATEVECTOR_QUBIT_CAP,
                got: self.n_qubits,
            });
        }
        if self.repetitions < 1 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        Ok(())
    }

    /// Single-qubit phase coefficients (always the raw features).
    fn single_coeffs(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    /// Pairwise phase coefficients for j < j'.
    fn pair_coeffs(&self, x: &[f64]) -> Vec<(usize, usize, f64)> {
        if !self.include_pairwise {
            return Vec::new();
        }
        let mut out = Vec::new();
        for j in 0..self.n_qubits {
            for jp in (j + 1)..self.n_qubits {
                let c = match self.variant {
                    FeatureMapVariant::Product => x[j] * x[jp],
                    FeatureMapVariant::PiShifted => {
                        (std::f64::consts::PI - x[j]) * (std::f64::consts::PI - x[jp])
                    }
                };
                out.push((j, jp, c));
            }
        }
        out
    }
}

/// Encode a feature vector as a pure state.
pub fn feature_state(cfg: &FeatureMapConfig, x: &[f64]) -> Result<StateVector> {
    cfg.validate()?;
    if x.len() != cfg.n_qubits {
        return Err(Error::DimMismatch {
            expected: cfg.n_qubits,
            got: x.len(),
        });
    }
    let n = cfg.n_qubits;
    let dim = 1usize << n;
    let singles = cfg.single_coeffs(x);
    let pairs = cfg.pair_coeffs(x);

    // Precompute the diagonal energy per basis state once; it is reused
    // across repetitions.
    let mut energy = vec![0.0f64; dim];
    for (b, e) in energy.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &c) in singles.iter().enumerate() {
            let z = if b & (1 << (n - 1 - j)) == 0 { 1.0 } else { -1.0 };
            acc += c * z;
        }
        for &(j, jp, c) in &pairs {
            let zj = if b & (1 << (n - 1 - j)) == 0 { 1.0 } else { -1.0 };
            let zjp = if b & (1 << (n - 1 - jp)) == 0 { 1.0 } else { -1.0 };
            acc += c * zj * zjp;
        }
        *e = acc;
    }

    let mut state = StateVector::zero(n)?;
    for _ in 0..cfg.repetitions {
        for q in 0..n {
            state.apply_h(q)?;
        }
        for (b, &e) in energy.iter().enumerate() {
            state.phase_basis(b, -e);
        }
    }
    Ok(state)
}

/// kappa(x, x') as a statevector overlap.
pub fn kernel_entry(cfg: &FeatureMapConfig, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    let a = feature_state(cfg, x)?;
    let b = feature_state(cfg, x_prime)?;
    overlap_sq(&a, &b)
}

/// Which kernel produced a Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelKind {
    Quantum { config: FeatureMapConfig },
    Rbf { sigma: f64 },
}

impl KernelKind {
    pub fn tag_byte(&self) -> u8 {
        match self {
            KernelKind::Quantum { .. } => 0,
            KernelKind::Rbf { .. } => 1,
        }
    }

    /// Hash of the serialized kernel parameters.
    pub fn config_sha256(&self) -> [u8; 32] {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("kernel kind serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hasher.finalize().into()
    }
}

/// A symmetric PSD Gram matrix with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub entries: Array2<f64>,
    pub kind: KernelKind,
    /// Source row index per Gram row (identity for whole-dataset Grams).
    pub index_map: Vec<usize>,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Smallest eigenvalue, for PSD validation.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = sym_eig(&self.entries, default_eig_tol(&self.entries))?;
        Ok(*eig.eigenvalues.last().expect("nonempty spectrum"))
    }

    /// Largest absolute symmetry defect.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.entries[[i, j]] - self.entries[[j, i]]).abs());
            }
        }
        worst
    }

    /// Largest deviation of the diagonal from one.
    pub fn diagonal_defect(&self) -> f64 {
        (0..self.n())
            .map(|i| (self.entries[[i, i]] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Cached feature states for one support set; prediction-time rows reuse
/// the encoded states.
pub struct QuantumKernel {
    cfg: FeatureMapConfig,
    states: Vec<StateVector>,
}

impl QuantumKernel {
    pub fn fit(cfg: FeatureMapConfig, features: ArrayView2<'_, f64>) -> Result<Self> {
        let states = features
            .rows()
            .into_iter()
            .map(|row| feature_state(&cfg, row.to_slice().expect("contiguous rows")))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantumKernel { cfg, states })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn config(&self) -> &FeatureMapConfig {
        &self.cfg
    }

    /// Gram matrix over the fitted support (N state preparations and
    /// N(N+1)/2 overlaps).
    pub fn gram(&self) -> Result<KernelMatrix> {
        let n = self.states.len();
        let mut entries = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = overlap_sq(&self.states[i], &self.states[j])?;
                entries[[i, j]] = v;
                entries[[j, i]] = v;
            }
        }
        Ok(KernelMatrix {
            entries,
            kind: KernelKind::Quantum { config: self.cfg },
            index_map: (0..n).collect(),
        })
    }

    /// kappa(x, support_i) for every fitted support point.
    pub fn row(&self, x: &[f64]) -> Result<Vec<f64>> {
        let sx = feature_state(&self.cfg, x)?;
        self.states
            .iter()
            .map(|s| overlap_sq(&sx, s))
            .collect()
    }
}

/// Quantum Gram matrix over a raw feature matrix.
pub fn kernel_matrix_features(
    cfg: &FeatureMapConfig,
    features: ArrayView2<'_, f64>,
) -> Result<KernelMatrix> {
    QuantumKernel::fit(*cfg, features)?.gram()
}

/// Quantum Gram matrix over a dataset; d_x must equal the qubit count.
pub fn kernel_matrix(cfg: &FeatureMapConfig, ds: &LabeledDataset) -> Result<KernelMatrix> {
    if ds.dim() != cfg.n_qubits {
        return Err(Error::DimMismatch {
            expected: cfg.n_qubits,
            got: ds.dim(),
        });
    }
    kernel_matrix_features(cfg, ds.features().view())
}

/// kappa(x, x_i) against an explicit support list.
pub fn kernel_row(
    cfg: &FeatureMapConfig,
    x: &[f64],
    support: ArrayView2<'_, f64>,
) -> Result<Vec<f64>> {
    if support.nrows() == 0 {
        return Ok(Vec::new());
    }
    QuantumKernel::fit(*cfg, support)?.row(x)
}

/// RBF Gram matrix over a raw feature matrix.
pub fn rbf_matrix_features(features: ArrayView2<'_, f64>, sigma: f64) -> Result<KernelMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma = {sigma} must be positive")));
    }
    let n = features.nrows();
    let mut entries = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let d2: f64 = features
                .row(i)
                .iter()
                .zip(features.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let v = (-d2 / (2.0 * sigma * sigma)).exp();
            entries[[i, j]] = v;
            entries[[j, i]] = v;
        }
    }
    Ok(KernelMatrix {
        entries,
        kind: KernelKind::Rbf { sigma },
        index_map: (0..n).collect(),
    })
}

/// RBF Gram matrix over a dataset.
pub fn rbf_matrix(ds: &LabeledDataset, sigma: f64) -> Result<KernelMatrix> {
    rbf_matrix_features(ds.features().view(), sigma)
}

/// Median of all pairwise Euclidean distances; the default RBF bandwidth.
pub fn median_pairwise_distance(features: ArrayView2<'_, f64>) -> f64 {
    let n = features.nrows();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = features
                .row(i)
                .iter()
                .zip(features.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    }
}
