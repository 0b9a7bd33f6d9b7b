//! Kernels of the input state and their propagation into certificate blocks.

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DVector;

/// Kernel bases of `rho` and `rho^{T_B}` for a trace-normalized state.
#[derive(Clone, Debug, Default)]
pub(crate) struct StateKernels {
    pub rho: Vec<DVector<Complex64>>,
    pub rho_tb: Vec<DVector<Complex64>>,
}

pub(crate) fn state_kernels(rho: &HermitianMatrix, tol: f64) -> StateKernels {
    let tb = rho.partial_transpose(&[1]).expect("bipartite registers");
    StateKernels { rho: psd_kernel(rho, tol), rho_tb: psd_kernel(&tb, tol) }
}

/// Kernel of a matrix that is PSD up to `tol`; empty when it has an
/// eigenvalue below `-tol` (infeasibility is then detected by the solver).
fn psd_kernel(m: &HermitianMatrix, tol: f64) -> Vec<DVector<Complex64>> {
    if m.min_eigenvalue() < -tol {
        return Vec::new();
    }
    m.kernel(tol)
}

/// Splits a vector over a concatenation of sub-blocks into the nonzero
/// restrictions, one per sub-block.
pub(crate) fn restrict(u: &[Complex64], offsets: &[usize], sizes: &[usize], out: &mut [Vec<DVector<Complex64>>]) {
    for (b, (&o, &d)) in offsets.iter().zip(sizes).enumerate() {
        let part = &u[o..o + d];
        if part.iter().any(|v| v.norm() > 1e-14) {
            out[b].push(DVector::from_column_slice(part));
        }
    }
}
