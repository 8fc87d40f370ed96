//! Exact statevector and density-matrix simulation.
//!
//! Conventions, fixed crate-wide:
//!
//! - Qubit 0 is the most significant bit of the basis index, so for an
//!   n-qubit register the basis state |q0 q1 ... q_{n-1}> has index
//!   `q0*2^{n-1} + ... + q_{n-1}`.
//! - Rotations use the half-angle convention `R_P(phi) = exp(-i phi P/2)`
//!   for P in {X, Y, Z}; the two-qubit phase gate is
//!   `ZZ(phi) = exp(-i phi Z (x) Z)` with no 1/2 factor.
//! - No shot sampling anywhere: expectation values are exact.
//!
//! Statevectors are capped at 12 qubits; dense unitaries and density
//! matrices at 6.

mod density;
mod gate;
mod observable;
mod state;

pub use density::{evolve_density, hilbert_schmidt_distance, DensityMatrix};
pub use gate::{bind_all, dense_unitary, Angle, GateKind, GateOp, DENSE_QUBIT_CAP};
pub use observable::{Observable, Pauli};
pub use state::{
    apply_gate, apply_gates, overlap_sq, trace_distance, StateVector, STATEVECTOR_QUBIT_CAP,
};
