//! Numerics for unitary field squeezing generated by laser-dressed atomic
//! ensembles in a two-mode optical cavity.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`fock`]: truncated two-mode Fock space tensored with `N` three-level
//!   atoms, sparse operators, pure and mixed states.
//! * [`params`]: the physical parameter model, mode geometry, the derived
//!   effective couplings, the frequency-matching condition and its solver,
//!   regime checks and dissipation estimates.
//! * [`hamiltonians`]: every rung of the reduction ladder, from the
//!   interaction-picture Hamiltonian down to the bare parametric coupling
//!   `Ω a†b† + Ω* ba`, plus the diagonal frame generators.
//! * [`evolution`]: unitary and Lindblad propagation, fidelities, quadrature
//!   statistics and the full-versus-effective comparison harness.
//! * [`squeeze`]: exact squeeze operators and closed-form squeezed-vacuum
//!   moments.
//! * [`inout`]: closed-form input-output theory of the driven two-mode
//!   parametric cavity.
//!
//! Conventions: `ħ = 1`, frequencies in units of a reference coupling `g`,
//! subsystem order `(mode a, mode b, atom 0, …, atom N-1)` with the first
//! factor most significant in the product basis.
#![no_std]
// `Float` supplies libm-backed methods in no_std builds. Once anything in the
// dependency graph links std, f64's inherent methods shadow them.
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod evolution;
pub mod fock;
pub mod hamiltonians;
pub mod inout;
pub mod linalg;
pub mod params;
pub mod squeeze;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// A real quantity that may legitimately diverge (critical points, zero
/// squeezing). Keeps infinities out of ordinary floating-point arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Extended::Infinite)
    }
}
