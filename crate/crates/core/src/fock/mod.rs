//! Truncated Fock space for two cavity modes tensored with `N` three-level
//! atoms: layout, sparse operators and states.
//!
//! Atomic level `|0>` (the excited state) is always kept in the local
//! dimension so every rung of the Hamiltonian ladder acts on one space.

mod layout;
mod operators;
mod sparse;
mod state;

pub use layout::{HilbertLayout, Mode, Subsystem, ATOM_LEVELS, DEFAULT_DIM_LIMIT};
pub use operators::{
    annihilation, atomic_op, creation, embed, local_annihilation, local_transition, number, sigma_minus,
    sigma_plus, sigma_z, OperatorMatrix, HERMITIAN_TOL,
};
pub use sparse::{CsrMatrix, TripletBuilder};
pub use state::{coherent_amplitudes, field_product, DensityMatrix, StateVector, NORM_TOL};

use crate::error::Result;

/// `<ψ|M|ψ>`; see also [`DensityMatrix::expectation`].
pub fn expectation(state: &StateVector, op: &OperatorMatrix) -> Result<crate::C64> {
    state.expectation(op)
}
