//! Measurement operators: single Pauli strings or dense Hermitian
//! matrices, with a cached spectral norm.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{hermitian_real_embedding, DensityMatrix};
use super::gate::DENSE_QUBIT_CAP;
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::relabel::sym_eig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_uppercase() {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::invalid(format!("unknown Pauli letter '{other}'"))),
        }
    }

    fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ObsKind {
    Pauli { axes: Vec<Pauli>, coeff: f64 },
    Dense(Array2<Complex64>),
}

/// A Hermitian measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    kind: ObsKind,
    n_qubits: usize,
    spectral_norm: f64,
}

impl Observable {
    /// A weighted Pauli string, one letter per qubit.
    pub fn pauli(axes: Vec<Pauli>, coeff: f64) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("pauli string must cover at least 1 qubit"));
        }
        if !coeff.is_finite() {
            return Err(Error::invalid("pauli coefficient must be finite"));
        }
        let n_qubits = axes.len();
        Ok(Observable {
            kind: ObsKind::Pauli { axes, coeff },
            n_qubits,
            spectral_norm: coeff.abs(),
        })
    }

    /// Z on one qubit of an n-qubit register; the crate's default head.
    pub fn z_on(qubit: usize, n_qubits: usize) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits,
            });
        }
        let axes = (0..n_qubits)
            .map(|q| if q == qubit { Pauli::Z } else { Pauli::I })
            .collect();
        Observable::pauli(axes, 1.0)
    }

    /// The identity observable (constant expectation 1).
    pub fn identity(n_qubits: usize) -> Result<Self> {
        Observable::pauli(vec![Pauli::I; n_qubits.max(1)], 1.0)
    }

    /// A dense Hermitian operator; spectral norm computed exactly through
    /// the real symmetric embedding.
    pub fn dense(matrix: Array2<Complex64>) -> Result<Self> {
        let (r, c) = matrix.dim();
        if r != c {
            return Err(Error::DimMismatch {
                expected: r,
                got: c,
            });
        }
        if r == 0 || !r.is_power_of_two() {
            return Err(Error::invalid(format!(
                "observable dimension {r} is not a power of two"
            )));
        }
        let n_qubits = r.trailing_zeros() as usize;
        if n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::QubitCap {
                what: "dense observable",
                cap: DENSE_QUBIT_CAP,
                got: n_qubits,
            });
        }
        for i in 0..r {
            for j in i..r {
                if (matrix[[i, j]] - matrix[[j, i]].conj()).norm() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "observable not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let eig = sym_eig(&hermitian_real_embedding(&matrix), 1e-13)?;
        let spectral_norm = eig
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        Ok(Observable {
            kind: ObsKind::Dense(matrix),
            n_qubits,
            spectral_norm,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Largest absolute eigenvalue, cached at construction.
    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    /// M |psi>.
    fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::DimMismatch {
                expected: 1 << self.n_qubits,
                got: state.dim(),
            });
        }
        let dim = state.dim();
        let amps = state.amplitudes();
        match &self.kind {
            ObsKind::Pauli { axes, coeff } => {
                let mut out = vec![Complex64::ZERO; dim];
                let n = self.n_qubits;
                let mut xmask = 0usize;
                for (q, &p) in axes.iter().enumerate() {
                    if matches!(p, Pauli::X | Pauli::Y) {
                        xmask |= 1 << (n - 1 - q);
                    }
                }
                for b in 0..dim {
                    let mut factor = Complex64::new(*coeff, 0.0);
                    for (q, &p) in axes.iter().enumerate() {
                        let bit_set = b & (1 << (n - 1 - q)) != 0;
                        match p {
                            Pauli::I | Pauli::X => {}
                            // Y|0> = i|1>, Y|1> = -i|0>.
                            Pauli::Y => {
                                factor *= if bit_set {
                                    Complex64::new(0.0, -1.0)
                                } else {
                                    Complex64::new(0.0, 1.0)
                                };
                            }
                            Pauli::Z => {
                                if bit_set {
                                    factor = -factor;
                                }
                            }
                        }
                    }
                    out[b ^ xmask] += factor * amps[b];
                }
                Ok(out)
            }
            ObsKind::Dense(m) => {
                let mut out = vec![Complex64::ZERO; dim];
                for i in 0..dim {
                    let mut acc = Complex64::ZERO;
                    for j in 0..dim {
                        acc += m[[i, j]] * amps[j];
                    }
                    out[i] = acc;
                }
                Ok(out)
            }
        }
    }

    /// Whether this is a scaled identity string (constant expectation).
    fn identity_coeff(&self) -> Option<f64> {
        match &self.kind {
            ObsKind::Pauli { axes, coeff } if axes.iter().all(|&p| matches!(p, Pauli::I)) => {
                Some(*coeff)
            }
            _ => None,
        }
    }

    /// <psi| M |psi>, checked real within 1e-10.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if state.n_qubits() == self.n_qubits {
            // <psi|c I|psi> = c exactly: states are unit-norm by invariant.
            if let Some(c) = self.identity_coeff() {
                return Ok(c);
            }
        }
        let mpsi = self.apply(state)?;
        let value: Complex64 = state
            .amplitudes()
            .iter()
            .zip(mpsi.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        if value.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "expectation has imaginary part {:e}",
                value.im
            )));
        }
        Ok(value.re)
    }

    /// tr(M rho), checked real within 1e-10.
    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.n_qubits() != self.n_qubits {
            return Err(Error::DimMismatch {
                expected: 1 << self.n_qubits,
                got: rho.dim(),
            });
        }
        // tr(c I rho) = c exactly: density matrices are trace-one by
        // invariant.
        if let Some(c) = self.identity_coeff() {
            return Ok(c);
        }
        let dim = rho.dim();
        let entries = rho.entries();
        let value: Complex64 = match &self.kind {
            ObsKind::Pauli { axes, coeff } => {
                let n = self.n_qubits;
                let mut xmask = 0usize;
                for (q, &p) in axes.iter().enumerate() {
                    if matches!(p, Pauli::X | Pauli::Y) {
                        xmask |= 1 << (n - 1 - q);
                    }
                }
                let mut acc = Complex64::ZERO;
                for b in 0..dim {
                    let mut factor = Complex64::new(*coeff, 0.0);
                    for (q, &p) in axes.iter().enumerate() {
                        let bit_set = b & (1 << (n - 1 - q)) != 0;
                        match p {
                            Pauli::I | Pauli::X => {}
                            Pauli::Y => {
                                factor *= if bit_set {
                                    Complex64::new(0.0, -1.0)
                                } else {
                                    Complex64::new(0.0, 1.0)
                                };
                            }
                            Pauli::Z => {
                                if bit_set {
                                    factor = -factor;
                                }
                            }
                        }
                    }
                    // M[b^xmask, b] = factor, so tr(M rho) picks rho[b, b^xmask].
                    acc += factor * entries[[b, b ^ xmask]];
                }
                acc
            }
            ObsKind::Dense(m) => {
                let mut acc = Complex64::ZERO;
                for i in 0..dim {
                    for j in 0..dim {
                        acc += m[[i, j]] * entries[[j, i]];
                    }
                }
                acc
            }
        };
        if value.im.abs() > 1e-10 {
            return Err(Error::Numerical(format!(
                "density expectation has imaginary part {:e}",
                value.im
            )));
        }
        Ok(value.re)
    }
}

// JSON form: {"type":"pauli","axes":"ZI","coeff":1.0} or
// {"type":"dense","dim":2,"matrix":[re,im,...]}.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ObservableRepr {
    Pauli { axes: String, coeff: f64 },
    Dense { dim: usize, matrix: Vec<f64> },
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match &self.kind {
            ObsKind::Pauli { axes, coeff } => ObservableRepr::Pauli {
                axes: axes.iter().map(|p| p.to_char()).collect(),
                coeff: *coeff,
            },
            ObsKind::Dense(m) => {
                let mut matrix = Vec::with_capacity(2 * m.len());
                for v in m.iter() {
                    matrix.push(v.re);
                    matrix.push(v.im);
                }
                ObservableRepr::Dense {
                    dim: m.nrows(),
                    matrix,
                }
            }
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ObservableRepr::deserialize(d)?;
        let built = match repr {
            ObservableRepr::Pauli { axes, coeff } => {
                let parsed: Result<Vec<Pauli>> = axes.chars().map(Pauli::from_char).collect();
                parsed.and_then(|axes| Observable::pauli(axes, coeff))
            }
            ObservableRepr::Dense { dim, matrix } => {
                if matrix.len() != 2 * dim * dim {
                    Err(Error::DimMismatch {
                        expected: 2 * dim * dim,
                        got: matrix.len(),
                    })
                } else {
                    let entries = Array2::from_shape_vec(
                        (dim, dim),
                        matrix
                            .chunks_exact(2)
                            .map(|c| Complex64::new(c[0], c[1]))
                            .collect(),
                    )
                    .expect("shape checked above");
                    Observable::dense(entries)
                }
            }
        };
        built.map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::GateOp;
    use crate::qsim::state::apply_gates;

    #[test]
    fn z_on_computational_basis() {
        let obs = Observable::z_on(0, 3).unwrap();
        let s = StateVector::zero(3).unwrap();
        assert!((obs.expectation(&s).unwrap() - 1.0).abs() < 1e-12);
        let s1 = StateVector::basis(3, 0b100).unwrap();
        assert!((obs.expectation(&s1).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_on_plus_state_is_zero() {
        let obs = Observable::z_on(0, 2).unwrap();
        let s = apply_gates(&StateVector::zero(2).unwrap(), &[GateOp::h(0)]).unwrap();
        assert!(obs.expectation(&s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zz_parity_on_bell_state() {
        let obs = Observable::pauli(vec![Pauli::Z, Pauli::Z], 1.0).unwrap();
        let bell = apply_gates(
            &StateVector::zero(2).unwrap(),
            &[GateOp::h(0), GateOp::cnot(0, 1)],
        )
        .unwrap();
        assert!((obs.expectation(&bell).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_matches_dense() {
        // X (x) Y as a Pauli string vs its dense matrix.
        let axes = vec![Pauli::X, Pauli::Y];
        let pauli = Observable::pauli(axes, 0.8).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::ZERO;
        let c = Complex64::new(0.8, 0.0);
        // X(x)Y with qubit 0 leftmost: rows/cols 00,01,10,11.
        let dense = Array2::from_shape_vec(
            (4, 4),
            vec![
                z,
                z,
                z,
                -i * c,
                z,
                z,
                i * c,
                z,
                z,
                -i * c,
                z,
                z,
                i * c,
                z,
                z,
                z,
            ],
        )
        .unwrap();
        let obs_dense = Observable::dense(dense).unwrap();
        assert!((obs_dense.spectral_norm() - 0.8).abs() < 1e-10);

        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let s = StateVector::haar_random(2, &mut rng).unwrap();
            let a = pauli.expectation(&s).unwrap();
            let b = obs_dense.expectation(&s).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn density_and_state_expectations_agree() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let s = StateVector::haar_random(2, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&s).unwrap();
        let obs = Observable::pauli(vec![Pauli::Y, Pauli::Z], 1.3).unwrap();
        let a = obs.expectation(&s).unwrap();
        let b = obs.expectation_density(&rho).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_zeroes_nonidentity_paulis() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        for axes in [
            vec![Pauli::Z, Pauli::I],
            vec![Pauli::X, Pauli::Y],
            vec![Pauli::I, Pauli::Z],
        ] {
            let obs = Observable::pauli(axes, 1.0).unwrap();
            assert!(obs.expectation_density(&rho).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_norm_of_pauli_is_coeff() {
        let obs = Observable::pauli(vec![Pauli::Z, Pauli::X], -2.5).unwrap();
        assert!((obs.spectral_norm() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn observable_json_round_trip() {
        let obs = Observable::pauli(vec![Pauli::Z, Pauli::I], 1.0).unwrap();
        let text = serde_json::to_string(&obs).unwrap();
        let back: Observable = serde_json::from_str(&text).unwrap();
        assert_eq!(obs, back);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let obs = Observable::z_on(0, 2).unwrap();
        let s = StateVector::zero(3).unwrap();
        assert!(obs.expectation(&s).is_err());
    }
}
