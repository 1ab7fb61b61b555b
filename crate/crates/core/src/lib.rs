//! Singular N-peakon solutions of the r-Camassa-Holm equation.
//!
//! A configuration of peaks with positions `Q` and momenta `P` determines a
//! continuous profile `u(x)` that solves a nonlinear Helmholtz problem between
//! peaks. This crate reconstructs that profile, evolves `(Q, P)` under the
//! induced Hamiltonian flow, and checks the result against independent
//! solvers and the analytical structure of the equation.

pub mod dynamics;
pub mod error;
pub mod numeric;
pub mod oracle;
pub mod profile;
pub mod quadrature;
pub mod scenarios;
pub mod segment;
pub mod suites;
pub mod types;
pub mod verify;

pub use error::{Error, Result};
pub use numeric::QuadratureSettings;
pub use segment::{invert_point, Segment};
pub use types::{
    height_from_momentum, momentum_from_height, signed_pow, BranchKind, Diagnostics, Exponent, PeakonState,
};
