//! Dense state and operator machinery over an explicit atom ⊗ photon basis.
//!
//! Nothing in here knows about physics parameters; the `models` module builds
//! Hamiltonians and dissipators out of these pieces.

mod basis;
mod operator;
pub(crate) mod sparse;
mod state;

pub use basis::{build_basis, AtomicLevel, Basis, BasisState, Mode, ModelKind};
pub use operator::{
    annihilation_operator, atomic_projector, creation_operator, number_operator, state_projector, Operator,
};
pub use state::{expectation, DensityMatrix, QuantumState, StateVector};
