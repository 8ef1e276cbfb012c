//! Numerics for a hybrid circuit in which a superconducting flux qubit couples
//! a collective spin ensemble (NV centers) to a transmission-line resonator.
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature runs
//! sweeps on the rayon thread pool and requires `std`. It contains:
//!
//! * [`qalgebra`]: dense operators on labeled tensor-product spaces, ladder and
//!   Pauli operators, commutators and the spectral propagator.
//! * [`physpar`]: closed-form coupling and frequency calculators.
//! * [`hammodels`]: builders for the full, rotating-wave, effective and
//!   exact multi-spin Hamiltonians.
//! * [`fntransform`]: Fröhlich–Nakajima generators, residual checks and
//!   numerically projected effective Hamiltonians.
//! * [`dynamics`]: Schrödinger evolution, transfer fidelity, cutoff
//!   convergence and parameter sweeps.
//!
//! Qubit basis ordering is `(e, g)` everywhere: level 0 is the excited state,
//! level 1 the ground state, so `σ_z = diag(1, -1)`.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "parallel"))]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod fntransform;
pub mod hammodels;
pub mod physpar;
pub mod qalgebra;

pub use error::{Error, Result};
pub use qalgebra::C64;
