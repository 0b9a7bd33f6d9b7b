//! Dense complex Hermitian linear algebra for bipartite and multipartite
//! states.
//!
//! Matrices carry explicit register metadata: a list of local dimensions
//! whose product is the matrix dimension. Multi-indices are row-major, so
//! for registers `[n, n]` the bipartite index `ij` maps to `i * n + j`.
//! Partial traces and partial transposes act on register subsets and fail
//! fast when the metadata is missing.

mod error;
mod hermitian;
pub mod par;
mod real;
mod registers;

pub use error::{Error, Result};
pub use hermitian::{HermitianJson, HermitianMatrix};
pub use num_complex::Complex64;
pub use real::{RealMatrixJson, RealSymmetric};
pub use registers::RegisterShape;

/// Tolerance on `max |M - M*|` accepted by constructors before symmetrizing.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Relative slack of the repo-wide PSD test.
pub const PSD_TOL: f64 = 1e-8;

/// Returns true when a matrix with smallest eigenvalue `min_eig` and Frobenius
/// norm `fro` is accepted as positive semidefinite.
pub fn psd_accepts(min_eig: f64, fro: f64) -> bool {
    min_eig >= -PSD_TOL * (1.0 + fro)
}
