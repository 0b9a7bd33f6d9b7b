use hermitian_core::{psd_accepts, Complex64, HermitianMatrix};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::triple::TripleXYZ;

/// Pair `(S, T)` defining the CLDUI witness `M_{S,T}`.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessPair {
    pub s: DMatrix<f64>,
    pub t: DMatrix<Complex64>,
}

/// `M_{S,T}` with `S_ij` at `(ij, ij)` and `T_ij` at `(ii, jj)`, so that
/// `<M_{S,T}, rho_(X,Y)> = <S, X> + <T, Y>` under the trace inner product.
pub fn witness_matrix(w: &WitnessPair) -> HermitianMatrix {
    let n = w.s.nrows();
    let mut m = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + j, i * n + j)] += Complex64::new(w.s[(i, j)], 0.0);
            m[(i * n + i, j * n + j)] += w.t[(i, j)];
        }
    }
    HermitianMatrix::new(m, vec![n, n]).expect("T must be Hermitian")
}

/// Necessary conditions for triple complete positivity; any `false` flag
/// certifies that the triple is outside the cone.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcpReport {
    pub x_nonnegative: bool,
    pub y_psd: bool,
    pub z_psd: bool,
    pub y_dominated: bool,
    pub z_dominated: bool,
}

impl PcpReport {
    pub fn all_pass(&self) -> bool {
        self.x_nonnegative && self.y_psd && self.z_psd && self.y_dominated && self.z_dominated
    }
}

fn psd(m: &DMatrix<Complex64>) -> bool {
    let h = HermitianMatrix::new(m.clone(), vec![]).expect("Hermitian");
    psd_accepts(h.min_eigenvalue(), h.frobenius_norm())
}

/// `X ≥ 0`, `Y ⪰ 0`, `Z ⪰ 0`, `|Y_ij|^2 ≤ X_ij X_ji`, `|Z_ij|^2 ≤ X_ij X_ji`.
pub fn pcp_necessary_checks(t: &TripleXYZ) -> PcpReport {
    let n = t.n();
    let x = t.x();
    let slack = 1e-12 * (1.0 + x.abs().max());
    let dominated =
        |m: &DMatrix<Complex64>| (0..n).all(|i| (0..n).all(|j| m[(i, j)].norm_sqr() <= x[(i, j)] * x[(j, i)] + slack));
    PcpReport {
        x_nonnegative: x.iter().all(|&v| v >= 0.0),
        y_psd: psd(t.y()),
        z_psd: psd(t.z()),
        y_dominated: dominated(t.y()),
        z_dominated: dominated(t.z()),
    }
}
