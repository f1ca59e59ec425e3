//! Dense complex linear algebra and quantum-state primitives.

pub mod matrix;
pub mod state;

pub use matrix::{
    evolve_vector, expm_hermitian_generator, hermitian_eig, kron, unitary_from_eig,
    ComplexMatrix, HermitianEig, HERMITICITY_TOL, MAX_DIM,
};
pub use state::{fidelity_pure, QuantumState, StateRepr};
