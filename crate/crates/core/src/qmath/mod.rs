//! Dense complex linear algebra and qubit primitives.
//!
//! Basis ordering is |0⟩-first and qubit 0 is the leftmost tensor factor,
//! i.e. the most significant bit of a basis index. Matrices written with the
//! excited state in the upper-left corner must be reversed before use here.

pub mod gates;
pub mod matrix;
pub mod ops;
pub mod state;

pub use gates::{cnot, controlled_phase, cz, hadamard, pauli, pauli_x, pauli_y, pauli_z, rotation_gate, Axis};
pub use matrix::{ComplexMatrix, MAX_DIM};
pub use ops::{
    apply_gate, apply_kraus, embed_operator, partial_trace, project_qubit, state_fidelity, tensor, tensor_all,
    GateMode, QubitRegister,
};
pub use state::{BlochPoint, PureState};
