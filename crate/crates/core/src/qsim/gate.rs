//! Gate descriptions and the dense-matrix route.
//!
//! `dense_unitary` builds the full 2^n x 2^n matrix of a gate list through
//! Kronecker products and matrix multiplication. It shares no code with the
//! stride-based statevector kernels, so the two routes cross-check each
//! other in tests.

use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap for dense unitaries and density matrices (2^6 = 64).
pub const DENSE_QUBIT_CAP: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    RX,
    RY,
    RZ,
    CNOT,
    ZZ,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::RX | GateKind::RY | GateKind::RZ => 1,
            GateKind::CNOT | GateKind::ZZ => 2,
        }
    }

    pub fn takes_angle(self) -> bool {
        !matches!(self, GateKind::H | GateKind::CNOT)
    }
}

/// A gate angle: absent (H, CNOT), bound, or referencing a parameter slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    None,
    Fixed(f64),
    Param(usize),
}

/// One gate in a circuit description.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Angle,
}

impl GateOp {
    pub fn h(qubit: usize) -> Self {
        GateOp {
            kind: GateKind::H,
            targets: vec![qubit],
            angle: Angle::None,
        }
    }

    pub fn rx(qubit: usize, angle: f64) -> Self {
        GateOp::with_fixed_angle(GateKind::RX, vec![qubit], angle)
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        GateOp::with_fixed_angle(GateKind::RY, vec![qubit], angle)
    }

    pub fn rz(qubit: usize, angle: f64) -> Self {
        GateOp::with_fixed_angle(GateKind::RZ, vec![qubit], angle)
    }

    pub fn rotation_param(kind: GateKind, qubit: usize, slot: usize) -> Result<Self> {
        if !matches!(kind, GateKind::RX | GateKind::RY | GateKind::RZ) {
            return Err(Error::invalid("parameter slots require a rotation gate"));
        }
        Ok(GateOp {
            kind,
            targets: vec![qubit],
            angle: Angle::Param(slot),
        })
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            kind: GateKind::CNOT,
            targets: vec![control, target],
            angle: Angle::None,
        }
    }

    pub fn zz(a: usize, b: usize, angle: f64) -> Self {
        GateOp::with_fixed_angle(GateKind::ZZ, vec![a, b], angle)
    }

    /// Structural validation against a register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::invalid(format!(
                "{:?} takes {} target(s), got {}",
                self.kind,
                self.kind.arity(),
                self.targets.len()
            )));
        }
        for &t in &self.targets {
            if t >= n_qubits {
                return Err(Error::QubitIndex {
                    index: t,
                    n_qubits,
                });
            }
        }
        if self.targets.len() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::invalid("two-qubit gate targets must be distinct"));
        }
        match (self.kind.takes_angle(), self.angle) {
            (true, Angle::None) => Err(Error::invalid(format!(
                "{:?} requires an angle",
                self.kind
            ))),
            (false, Angle::Fixed(_)) | (false, Angle::Param(_)) => Err(Error::invalid(format!(
                "{:?} takes no angle",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    /// The bound angle; `Param` slots and angle-free gates are rejected.
    pub fn bound_angle(&self) -> Result<f64> {
        match self.angle {
            Angle::Fixed(a) => {
                if !a.is_finite() {
                    return Err(Error::invalid("gate angle must be finite"));
                }
                Ok(a)
            }
            Angle::Param(slot) => Err(Error::UnboundParam(slot)),
            Angle::None => Err(Error::invalid(format!("{:?} has no angle", self.kind))),
        }
    }

    /// Resolve a `Param` slot against a parameter vector.
    pub fn bind(&self, params: &[f64]) -> Result<GateOp> {
        match self.angle {
            Angle::Param(slot) => {
                let value = *params.get(slot).ok_or(Error::UnboundParam(slot))?;
                Ok(GateOp {
                    kind: self.kind,
                    targets: self.targets.clone(),
                    angle: Angle::Fixed(value),
                })
            }
            _ => Ok(self.clone()),
        }
    }
}

/// Bind every parameter slot in a gate list.
pub fn bind_all(gates: &[GateOp], params: &[f64]) -> Result<Vec<GateOp>> {
    gates.iter().map(|g| g.bind(params)).collect()
}

// JSON representation: {kind, targets, angle|param}.
#[derive(Serialize, Deserialize)]
struct GateOpRepr {
    kind: GateKind,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<usize>,
}

impl Serialize for GateOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (angle, param) = match self.angle {
            Angle::None => (None, None),
            Angle::Fixed(a) => (Some(a), None),
            Angle::Param(p) => (None, Some(p)),
        };
        GateOpRepr {
            kind: self.kind,
            targets: self.targets.clone(),
            angle,
            param,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GateOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GateOpRepr::deserialize(d)?;
        let angle = match (repr.angle, repr.param) {
            (Some(_), Some(_)) => {
                return Err(serde::de::Error::custom(
                    "gate carries both an angle and a parameter slot",
                ))
            }
            (Some(a), None) => Angle::Fixed(a),
            (None, Some(p)) => Angle::Param(p),
            (None, None) => Angle::None,
        };
        Ok(GateOp {
            kind: repr.kind,
            targets: repr.targets,
            angle,
        })
    }
}

fn single_qubit_matrix(kind: GateKind, angle: f64) -> Array2<Complex64> {
    let z = Complex64::ZERO;
    match kind {
        GateKind::H => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Array2::from_shape_vec((2, 2), vec![h, h, h, -h]).unwrap()
        }
        GateKind::RX => {
            let (s, c) = (angle / 2.0).sin_cos();
            let cc = Complex64::new(c, 0.0);
            let ms = Complex64::new(0.0, -s);
            Array2::from_shape_vec((2, 2), vec![cc, ms, ms, cc]).unwrap()
        }
        GateKind::RY => {
            let (s, c) = (angle / 2.0).sin_cos();
            let cc = Complex64::new(c, 0.0);
            let ss = Complex64::new(s, 0.0);
            Array2::from_shape_vec((2, 2), vec![cc, -ss, ss, cc]).unwrap()
        }
        GateKind::RZ => {
            let neg = Complex64::from_polar(1.0, -angle / 2.0);
            let pos = Complex64::from_polar(1.0, angle / 2.0);
            Array2::from_shape_vec((2, 2), vec![neg, z, z, pos]).unwrap()
        }
        _ => unreachable!("two-qubit kinds handled separately"),
    }
}

fn complex_eye(dim: usize) -> Array2<Complex64> {
    let mut m = Array2::<Complex64>::zeros((dim, dim));
    for i in 0..dim {
        m[[i, i]] = Complex64::ONE;
    }
    m
}

/// Dense matrix of one gate on an n-qubit register.
fn gate_dense(gate: &GateOp, n_qubits: usize) -> Result<Array2<Complex64>> {
    gate.validate(n_qubits)?;
    let dim = 1usize << n_qubits;
    match gate.kind {
        GateKind::H | GateKind::RX | GateKind::RY | GateKind::RZ => {
            let angle = if gate.kind.takes_angle() {
                gate.bound_angle()?
            } else {
                0.0
            };
            let q = gate.targets[0];
            let m = single_qubit_matrix(gate.kind, angle);
            // Qubit 0 is the leftmost Kronecker factor.
            let left = complex_eye(1 << q);
            let right = complex_eye(1 << (n_qubits - 1 - q));
            Ok(kron(&kron(&left, &m), &right))
        }
        GateKind::CNOT => {
            let cpos = n_qubits - 1 - gate.targets[0];
            let tpos = n_qubits - 1 - gate.targets[1];
            let cmask = 1usize << cpos;
            let tmask = 1usize << tpos;
            let mut u = Array2::<Complex64>::zeros((dim, dim));
            for b in 0..dim {
                let out = if b & cmask != 0 { b ^ tmask } else { b };
                u[[out, b]] = Complex64::ONE;
            }
            Ok(u)
        }
        GateKind::ZZ => {
            let angle = gate.bound_angle()?;
            let apos = n_qubits - 1 - gate.targets[0];
            let bpos = n_qubits - 1 - gate.targets[1];
            let mut u = Array2::<Complex64>::zeros((dim, dim));
            for b in 0..dim {
                let za = if b & (1 << apos) == 0 { 1.0 } else { -1.0 };
                let zb = if b & (1 << bpos) == 0 { 1.0 } else { -1.0 };
                u[[b, b]] = Complex64::from_polar(1.0, -angle * za * zb);
            }
            Ok(u)
        }
    }
}

/// Dense unitary of a gate list (gates[0] acts first).
///
/// Built independently of the statevector kernels so it can serve as a
/// test oracle; capped at 6 qubits.
pub fn dense_unitary(gates: &[GateOp], n_qubits: usize) -> Result<Array2<Complex64>> {
    if n_qubits == 0 {
        return Err(Error::invalid("qubit count must be at least 1"));
    }
    if n_qubits > DENSE_QUBIT_CAP {
        return Err(Error::QubitCap {
            what: "dense unitary",
            cap: DENSE_QUBIT_CAP,
            got: n_qubits,
        });
    }
    let mut u = complex_eye(1 << n_qubits);
    for g in gates {
        u = gate_dense(g, n_qubits)?.dot(&u);
    }
    Ok(u)
}
