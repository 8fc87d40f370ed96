//! The unitary-compiling task: random gate-list targets and
//! (input, target) state-pair datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::{apply_gates, GateOp, StateVector};

/// A target unitary described as a gate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetUnitary {
    pub n_qubits: usize,
    pub gates: Vec<GateOp>,
}

impl TargetUnitary {
    pub fn identity(n_qubits: usize) -> Self {
        TargetUnitary {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        apply_gates(state, &self.gates)
    }
}

/// Draw a random target circuit from the pool {Rx, Ry, Rz, CNOT}.
///
/// Rotation angles are uniform in [0, 2 pi); CNOT picks a uniform ordered
/// qubit pair. On a single qubit the pool degenerates to the rotations.
pub fn random_target_unitary(n_qubits: usize, n_gates: usize, seed: u64) -> Result<TargetUnitary> {
    if n_qubits < 1 {
        return Err(Error::invalid("target needs at least one qubit"));
    }
    if n_gates < 1 {
        return Err(Error::invalid("target needs at least one gate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gates = Vec::with_capacity(n_gates);
    for _ in 0..n_gates {
        let pool = if n_qubits > 1 { 4 } else { 3 };
        match rng.random_range(0..pool) {
            0 => gates.push(GateOp::rx(
                rng.random_range(0..n_qubits),
                rng.random_range(0.0..std::f64::consts::TAU),
            )),
            1 => gates.push(GateOp::ry(
                rng.random_range(0..n_qubits),
                rng.random_range(0.0..std::f64::consts::TAU),
            )),
            2 => gates.push(GateOp::rz(
                rng.random_range(0..n_qubits),
                rng.random_range(0.0..std::f64::consts::TAU),
            )),
            _ => {
                let control = rng.random_range(0..n_qubits);
                let mut target = rng.random_range(0..n_qubits);
                while target == control {
                    target = rng.random_range(0..n_qubits);
                }
                gates.push(GateOp::cnot(control, target));
            }
        }
    }
    Ok(TargetUnitary { n_qubits, gates })
}

/// Paired pure states related by one fixed unitary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatePairDataset {
    pub n_qubits: usize,
    pub inputs: Vec<StateVector>,
    pub targets: Vec<StateVector>,
}

impl StatePairDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<StatePairDataset> {
        let mut inputs = Vec::with_capacity(indices.len());
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::invalid(format!("pair index {i} out of range")));
            }
            inputs.push(self.inputs[i].clone());
            targets.push(self.targets[i].clone());
        }
        Ok(StatePairDataset {
            n_qubits: self.n_qubits,
            inputs,
            targets,
        })
    }
}

/// Haar-random inputs pushed through the target unitary.
pub fn gen_compiling_dataset(
    target: &TargetUnitary,
    n: usize,
    seed: u64,
) -> Result<StatePairDataset> {
    if n == 0 {
        return Err(Error::invalid("pair count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let input = StateVector::haar_random(target.n_qubits, &mut rng)?;
        let output = target.apply(&input)?;
        inputs.push(input);
        targets.push(output);
    }
    Ok(StatePairDataset {
        n_qubits: target.n_qubits,
        inputs,
        targets,
    })
}

/// On-disk form of a generated compiling dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompileDatasetFile {
    pub target: TargetUnitary,
    pub pairs: StatePairDataset,
}

impl CompileDatasetFile {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let out = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(out), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{dense_unitary, GateKind};

    #[test]
    fn single_qubit_pool_has_no_cnot() {
        let target = random_target_unitary(1, 30, 4).unwrap();
        assert!(target
            .gates
            .iter()
            .all(|g| !matches!(g.kind, GateKind::CNOT)));
    }

    #[test]
    fn generated_circuit_is_unitary() {
        let target = random_target_unitary(3, 20, 8).unwrap();
        let u = dense_unitary(&target.gates, 3).unwrap();
        let udag = u.t().mapv(|c| c.conj());
        let prod = udag.dot(&u);
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]].re - want).abs() < 1e-10);
                assert!(prod[[i, j]].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn target_generation_deterministic() {
        let a = random_target_unitary(2, 15, 77).unwrap();
        let b = random_target_unitary(2, 15, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_target_pairs_match() {
        let target = TargetUnitary::identity(2);
        let pairs = gen_compiling_dataset(&target, 5, 3).unwrap();
        for (i, t) in pairs.inputs.iter().zip(pairs.targets.iter()) {
            assert_eq!(i.amplitudes(), t.amplitudes());
        }
    }

    #[test]
    fn bit_flip_target() {
        // X = RX(pi) up to a global phase; check |0> maps to |1| in modulus.
        let target = TargetUnitary {
            n_qubits: 1,
            gates: vec![GateOp::rx(0, std::f64::consts::PI)],
        };
        let zero = StateVector::zero(1).unwrap();
        let out = target.apply(&zero).unwrap();
        assert!(out.amplitudes()[0].norm() < 1e-12);
        assert!((out.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pairs_are_unit_norm() {
        let target = random_target_unitary(2, 12, 5).unwrap();
        let pairs = gen_compiling_dataset(&target, 20, 6).unwrap();
        for (i, t) in pairs.inputs.iter().zip(pairs.targets.iter()) {
            assert!((i.norm() - 1.0).abs() < 1e-12);
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_json_round_trip() {
        let target = random_target_unitary(2, 6, 15).unwrap();
        let pairs = gen_compiling_dataset(&target, 3, 2).unwrap();
        let text = serde_json::to_string(&pairs).unwrap();
        let back: StatePairDataset = serde_json::from_str(&text).unwrap();
        assert_eq!(pairs.inputs[1].amplitudes(), back.inputs[1].amplitudes());
    }
}
