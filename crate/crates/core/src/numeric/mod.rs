//! Low-level numerical kernels: adaptive Gauss–Kronrod quadrature, fixed
//! Gauss–Legendre panels, Brent's bracketed root finder, and small banded
//! and dense linear solvers.

pub mod brent;
pub mod dense;
pub mod gauss_kronrod;
pub mod gauss_legendre;
pub mod tridiag;

pub use brent::{brent_root, RootError};
pub use dense::solve_dense;
pub use gauss_kronrod::{integrate, QuadratureError, QuadratureSettings};
pub use gauss_legendre::GaussLegendre;
pub use tridiag::solve_tridiagonal;
