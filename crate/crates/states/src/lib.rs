//! Structured bipartite states on `C^n ⊗ C^n`.
//!
//! LDOI states are stored as triples `(X, Y, Z)`; projections onto the three
//! invariance classes act by support masking. The analytic example families
//! are returned unnormalized unless [`Scale::TraceOne`] is requested.

mod families;
mod triple;
mod witness;

use hermitian_core::HermitianMatrix;
use patterns::Regime;

pub use families::{dicke, family_rho_aap, family_rho_ab, triple_rho_aap, triple_rho_ab, Scale};
pub use triple::{rho_from_triple, square_registers, triple_from_rho, TripleJson, TripleXYZ, LDOI_TOL};
pub use witness::{pcp_necessary_checks, witness_matrix, PcpReport, WitnessPair};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("diagonals of X, Y, Z differ at index {0}")]
    DiagonalMismatch(usize),
    #[error("state is not LDOI: off-pattern entry of modulus {0:e}")]
    NotLdoi(f64),
    #[error("state is not Bose symmetric (deviation {0:e})")]
    NotBose(f64),
    #[error("expected registers [n, n], found {0:?}")]
    Registers(Vec<usize>),
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Core(#[from] hermitian_core::Error),
}

/// True when entry `(ij, kl)` lies in the support of the regime:
/// CLDUI `{ij,ij} ∪ {ii,kk}`, LDUI `{ij,ij} ∪ {ij,ji}`, LDOI their union.
pub fn in_support(regime: Regime, i: usize, j: usize, k: usize, l: usize) -> bool {
    let diag = i == k && j == l;
    let omega = diag || (i == j && k == l);
    let phi = diag || (i == l && j == k);
    match regime {
        Regime::Generic => true,
        Regime::Cldui => omega,
        Regime::Ldui => phi,
        Regime::Ldoi => omega || phi,
    }
}

/// Projection onto the regime's invariant subspace by zeroing every entry
/// outside its support. `Generic` returns the input unchanged.
pub fn project(rho: &HermitianMatrix, regime: Regime) -> Result<HermitianMatrix, StateError> {
    let n = square_registers(rho)?;
    let d = n * n;
    let m = nalgebra::DMatrix::from_fn(d, d, |a, b| {
        if in_support(regime, a / n, a % n, b / n, b % n) {
            rho.get(a, b)
        } else {
            hermitian_core::Complex64::new(0.0, 0.0)
        }
    });
    Ok(HermitianMatrix::new(m, vec![n, n])?)
}

/// True when entries outside the regime's support are at most `tol`.
pub fn has_support(rho: &HermitianMatrix, regime: Regime, tol: f64) -> Result<bool, StateError> {
    let n = square_registers(rho)?;
    for a in 0..n * n {
        for b in 0..n * n {
            if !in_support(regime, a / n, a % n, b / n, b % n) && rho.get(a, b).norm() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest deviation from `rho_{ij,kl} = rho_{ij,lk}`.
pub fn bose_deviation(rho: &HermitianMatrix) -> Result<f64, StateError> {
    let n = square_registers(rho)?;
    let mut d: f64 = 0.0;
    for a in 0..n * n {
        for k in 0..n {
            for l in 0..n {
                d = d.max((rho.get(a, k * n + l) - rho.get(a, l * n + k)).norm());
            }
        }
    }
    Ok(d)
}

/// Divides by the trace; the zero matrix is returned unchanged.
pub fn trace_normalized(rho: &HermitianMatrix) -> (HermitianMatrix, f64) {
    let tr = rho.trace();
    if tr.abs() > 0.0 {
        (rho.scale(1.0 / tr), tr)
    } else {
        (rho.clone(), 1.0)
    }
}
