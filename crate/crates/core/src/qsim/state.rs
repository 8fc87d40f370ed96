//! Pure-state simulation: amplitude storage and in-place gate kernels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::gate::{Angle, GateKind, GateOp};
use crate::error::{Error, Result};

/// Hard cap on statevector size (2^12 amplitudes).
pub const STATEVECTOR_QUBIT_CAP: usize = 12;

/// A normalized n-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    n_qubits: usize,
}

impl StateVector {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_cap(n_qubits)?;
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(StateVector { amps, n_qubits })
    }

    /// Computational basis state |index> on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_cap(n_qubits)?;
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Ok(StateVector { amps, n_qubits })
    }

    /// Build from raw amplitudes; the length must be a power of two and the
    /// norm must be 1 within 1e-12.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {dim} is not a power of two"
            )));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        check_qubit_cap(n_qubits)?;
        let state = StateVector { amps, n_qubits };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "state not normalized: ||psi|| = {norm}"
            )));
        }
        Ok(state)
    }

    /// A Haar-random pure state: complex standard normals, normalized.
    pub fn haar_random<R: Rng>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubit_cap(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut amps: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(StateVector { amps, n_qubits })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// <self|other>.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Bit position of a qubit inside the basis index (qubit 0 = MSB).
    #[inline]
    fn bit(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitIndex {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.n_qubits - 1 - qubit)
    }

    /// Apply a 2x2 matrix to one qubit, in place.
    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        let stride = 1usize << self.bit(qubit)?;
        let dim = self.dim();
        let mut base = 0;
        while base < dim {
            for off in base..base + stride {
                let i0 = off;
                let i1 = off + stride;
                let a0 = self.amps[i0];
                let a1 = self.amps[i1];
                self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
        Ok(())
    }

    pub fn apply_h(&mut self, qubit: usize) -> Result<()> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex64::new(h, 0.0);
        self.apply_single(qubit, [[c, c], [c, -c]])
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let (s, c) = (angle / 2.0).sin_cos();
        let cc = Complex64::new(c, 0.0);
        let ms = Complex64::new(0.0, -s);
        self.apply_single(qubit, [[cc, ms], [ms, cc]])
    }

    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let (s, c) = (angle / 2.0).sin_cos();
        let cc = Complex64::new(c, 0.0);
        let ss = Complex64::new(s, 0.0);
        self.apply_single(qubit, [[cc, -ss], [ss, cc]])
    }

    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        let pos = Complex64::from_polar(1.0, angle / 2.0);
        let neg = Complex64::from_polar(1.0, -angle / 2.0);
        let zero = Complex64::ZERO;
        self.apply_single(qubit, [[neg, zero], [zero, pos]])
    }

    /// Rotation about the given Pauli axis.
    pub fn apply_rotation(&mut self, axis: GateKind, qubit: usize, angle: f64) -> Result<()> {
        match axis {
            GateKind::RX => self.apply_rx(qubit, angle),
            GateKind::RY => self.apply_ry(qubit, angle),
            GateKind::RZ => self.apply_rz(qubit, angle),
            _ => Err(Error::invalid("apply_rotation expects RX, RY, or RZ")),
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        if control == target {
            return Err(Error::invalid("cnot control and target must differ"));
        }
        let cmask = 1usize << self.bit(control)?;
        let tmask = 1usize << self.bit(target)?;
        for b in 0..self.dim() {
            if b & cmask != 0 && b & tmask == 0 {
                self.amps.swap(b, b | tmask);
            }
        }
        Ok(())
    }

    /// exp(-i angle Z(x)Z) on a qubit pair: a +/- phase per basis state.
    pub fn apply_zz(&mut self, a: usize, b: usize, angle: f64) -> Result<()> {
        if a == b {
            return Err(Error::invalid("zz qubits must differ"));
        }
        let amask = 1usize << self.bit(a)?;
        let bmask = 1usize << self.bit(b)?;
        let plus = Complex64::from_polar(1.0, -angle);
        let minus = Complex64::from_polar(1.0, angle);
        for idx in 0..self.dim() {
            let za = idx & amask == 0;
            let zb = idx & bmask == 0;
            self.amps[idx] *= if za == zb { plus } else { minus };
        }
        Ok(())
    }

    /// Multiply one basis amplitude's phase directly; used by diagonal
    /// feature-map blocks.
    #[inline]
    pub(crate) fn phase_basis(&mut self, index: usize, phase: f64) {
        self.amps[index] *= Complex64::from_polar(1.0, phase);
    }

    pub fn apply_gate_mut(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match gate.kind {
            GateKind::H => self.apply_h(gate.targets[0]),
            GateKind::RX | GateKind::RY | GateKind::RZ => {
                self.apply_rotation(gate.kind, gate.targets[0], gate.bound_angle()?)
            }
            GateKind::CNOT => self.apply_cnot(gate.targets[0], gate.targets[1]),
            GateKind::ZZ => self.apply_zz(gate.targets[0], gate.targets[1], gate.bound_angle()?),
        }
    }

    /// Interleaved [re0, im0, re1, im1, ...] representation.
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for a in &self.amps {
            out.push(a.re);
            out.push(a.im);
        }
        out
    }

    pub fn from_interleaved(values: &[f64]) -> Result<Self> {
        if values.len() % 2 != 0 {
            return Err(Error::invalid("interleaved amplitude list has odd length"));
        }
        let amps: Vec<Complex64> = values
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        StateVector::from_amplitudes(amps)
    }
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_interleaved().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(d)?;
        StateVector::from_interleaved(&values).map_err(serde::de::Error::custom)
    }
}

fn check_qubit_cap(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    if n_qubits > STATEVECTOR_QUBIT_CAP {
        return Err(Error::QubitCap {
            what: "statevector",
            cap: STATEVECTOR_QUBIT_CAP,
            got: n_qubits,
        });
    }
    Ok(())
}

/// Apply one gate, returning a new state.
pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply_gate_mut(gate)?;
    Ok(out)
}

/// Apply a gate sequence left to right (gates[0] acts first).
pub fn apply_gates(state: &StateVector, gates: &[GateOp]) -> Result<StateVector> {
    let mut out = state.clone();
    for g in gates {
        out.apply_gate_mut(g)?;
    }
    Ok(out)
}

/// |<b|a>|^2.
pub fn overlap_sq(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(b.inner(a)?.norm_sqr())
}

/// Trace distance between pure states, sqrt(1 - |<a|b>|^2).
pub fn trace_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = overlap_sq(a, b)?;
    Ok((1.0 - overlap).max(0.0).sqrt())
}

// Convenience used by gate construction in several modules.
impl GateOp {
    pub fn with_fixed_angle(kind: GateKind, targets: Vec<usize>, angle: f64) -> Self {
        GateOp {
            kind,
            targets,
            angle: Angle::Fixed(angle),
        }
    }
}
