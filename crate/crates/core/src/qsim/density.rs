//! Mixed-state simulation on dense density matrices.

use ndarray::Array2;
use num_complex::Complex64;

use super::gate::{dense_unitary, GateOp, DENSE_QUBIT_CAP};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::relabel::sym_eig;

/// A trace-one Hermitian density matrix on up to `DENSE_QUBIT_CAP` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Array2<Complex64>,
    n_qubits: usize,
}

impl DensityMatrix {
    /// Validates squareness, the qubit cap, Hermiticity (1e-12), and unit
    /// trace (1e-12).
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::DimMismatch {
                expected: r,
                got: c,
            });
        }
        if r == 0 || !r.is_power_of_two() {
            return Err(Error::invalid(format!(
                "density dimension {r} is not a power of two"
            )));
        }
        let n_qubits = r.trailing_zeros() as usize;
        if n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::QubitCap {
                what: "density matrix",
                cap: DENSE_QUBIT_CAP,
                got: n_qubits,
            });
        }
        for i in 0..r {
            for j in i..r {
                let a = entries[[i, j]];
                let b = entries[[j, i]].conj();
                if (a - b).norm() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "density matrix not Hermitian at ({i},{j})"
                    )));
                }
            }
        }
        let trace: Complex64 = (0..r).map(|i| entries[[i, i]]).sum();
        if (trace - Complex64::ONE).norm() > 1e-12 {
            return Err(Error::invalid(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        Ok(DensityMatrix { entries, n_qubits })
    }

    /// |psi><psi| for a pure state.
    pub fn from_pure(state: &StateVector) -> Result<Self> {
        if state.n_qubits() > DENSE_QUBIT_CAP {
            return Err(Error::QubitCap {
                what: "density matrix",
                cap: DENSE_QUBIT_CAP,
                got: state.n_qubits(),
            });
        }
        let dim = state.dim();
        let amps = state.amplitudes();
        let mut entries = Array2::<Complex64>::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                entries[[i, j]] = amps[i] * amps[j].conj();
            }
        }
        Ok(DensityMatrix {
            entries,
            n_qubits: state.n_qubits(),
        })
    }

    /// I / 2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > DENSE_QUBIT_CAP {
            return Err(Error::QubitCap {
                what: "density matrix",
                cap: DENSE_QUBIT_CAP,
                got: n_qubits,
            });
        }
        let dim = 1usize << n_qubits;
        let mut entries = Array2::<Complex64>::zeros((dim, dim));
        let p = Complex64::new(1.0 / dim as f64, 0.0);
        for i in 0..dim {
            entries[[i, i]] = p;
        }
        Ok(DensityMatrix { entries, n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// tr(rho^2), 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let prod = self.entries.dot(&self.entries);
        (0..self.dim()).map(|i| prod[[i, i]].re).sum()
    }

    /// Smallest eigenvalue, via the real symmetric embedding
    /// [[Re, -Im], [Im, Re]] whose spectrum equals the Hermitian one
    /// (doubled).
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = sym_eig(&hermitian_real_embedding(&self.entries), 1e-13)?;
        Ok(*eig
            .eigenvalues
            .last()
            .expect("eigendecomposition of a nonempty matrix"))
    }

    /// Interleaved row-major [re, im, ...] of all entries.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim() * self.dim());
        for v in self.entries.iter() {
            out.push(v.re);
            out.push(v.im);
        }
        out
    }

    pub fn from_interleaved(dim: usize, values: &[f64]) -> Result<Self> {
        if values.len() != 2 * dim * dim {
            return Err(Error::DimMismatch {
                expected: 2 * dim * dim,
                got: values.len(),
            });
        }
        let entries = Array2::from_shape_vec(
            (dim, dim),
            values
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
        .expect("shape checked above");
        DensityMatrix::new(entries)
    }
}

/// Real symmetric embedding of a Hermitian matrix.
pub(crate) fn hermitian_real_embedding(h: &Array2<Complex64>) -> Array2<f64> {
    let d = h.nrows();
    let mut s = Array2::<f64>::zeros((2 * d, 2 * d));
    for i in 0..d {
        for j in 0..d {
            let v = h[[i, j]];
            s[[i, j]] = v.re;
            s[[i + d, j + d]] = v.re;
            s[[i, j + d]] = -v.im;
            s[[i + d, j]] = v.im;
        }
    }
    // Round-off: force exact symmetry before the Jacobi solver.
    for i in 0..2 * d {
        for j in (i + 1)..2 * d {
            let avg = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = avg;
            s[[j, i]] = avg;
        }
    }
    s
}

/// rho -> U rho U^dagger for a bound gate list.
pub fn evolve_density(rho: &DensityMatrix, gates: &[GateOp]) -> Result<DensityMatrix> {
    let u = dense_unitary(gates, rho.n_qubits())?;
    let udag = u.t().mapv(|c| c.conj());
    let entries = u.dot(rho.entries()).dot(&udag);
    // The product drifts from exact Hermiticity only at round-off level;
    // re-validate through the constructor.
    let dim = entries.nrows();
    let mut fixed = entries;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let avg = 0.5 * (fixed[[i, j]] + fixed[[j, i]].conj());
            fixed[[i, j]] = avg;
            fixed[[j, i]] = avg.conj();
        }
        fixed[[i, i]] = Complex64::new(fixed[[i, i]].re, 0.0);
    }
    DensityMatrix::new(fixed)
}

/// Frobenius distance between density matrices.
pub fn hilbert_schmidt_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut acc = 0.0;
    for (x, y) in a.entries().iter().zip(b.entries().iter()) {
        acc += (x - y).norm_sqr();
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::GateOp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_gate_list_preserves_rho() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let out = evolve_density(&rho, &[]).unwrap();
        assert_eq!(rho, out);
    }

    #[test]
    fn purity_preserved_for_pure_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = StateVector::haar_random(2, &mut rng).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let gates = vec![GateOp::h(0), GateOp::cnot(0, 1), GateOp::ry(1, 0.7)];
        let out = evolve_density(&rho, &gates).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn maximally_mixed_invariant_under_unitaries() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let gates = vec![GateOp::rx(0, 1.1), GateOp::cnot(1, 0), GateOp::h(1)];
        let out = evolve_density(&rho, &gates).unwrap();
        for (a, b) in rho.entries().iter().zip(out.entries().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn min_eigenvalue_of_pure_state() {
        let psi = StateVector::zero(2).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let min = rho.min_eigenvalue().unwrap();
        assert!(min.abs() < 1e-10);
    }

    #[test]
    fn hs_distance_cases() {
        let a = DensityMatrix::maximally_mixed(1).unwrap();
        let b = DensityMatrix::from_pure(&StateVector::zero(1).unwrap()).unwrap();
        assert!(hilbert_schmidt_distance(&a, &a).unwrap() < 1e-14);
        // ||diag(1/2,1/2) - diag(1,0)||_F = sqrt(1/2).
        let d = hilbert_schmidt_distance(&a, &b).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn interleaved_round_trip() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let back = DensityMatrix::from_interleaved(4, &rho.to_interleaved()).unwrap();
        assert_eq!(rho, back);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = Array2::<Complex64>::zeros((2, 2));
        m[[0, 0]] = Complex64::new(0.5, 0.0);
        m[[1, 1]] = Complex64::new(0.5, 0.0);
        m[[0, 1]] = Complex64::new(0.3, 0.0);
        m[[1, 0]] = Complex64::new(-0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
