use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DMatrix;

use crate::triple::{rho_from_triple, TripleXYZ};

/// Output scaling of the family constructors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scale {
    #[default]
    Raw,
    TraceOne,
}

fn scaled(rho: HermitianMatrix, scale: Scale) -> HermitianMatrix {
    match scale {
        Scale::Raw => rho,
        Scale::TraceOne => crate::trace_normalized(&rho).0,
    }
}

/// `(X, J_3)` with `X = [[1, a, a'], [a', 1, a], [a, a', 1]]`.
pub fn triple_rho_aap(a: f64, ap: f64) -> TripleXYZ {
    let x = DMatrix::from_row_slice(3, 3, &[1.0, a, ap, ap, 1.0, a, a, ap, 1.0]);
    let y = DMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
    TripleXYZ::from_pair(x, y).expect("valid by construction")
}

/// The CLDUI state `rho_{a,a'}` on `C^3 ⊗ C^3`.
pub fn family_rho_aap(a: f64, ap: f64, scale: Scale) -> HermitianMatrix {
    scaled(rho_from_triple(&triple_rho_aap(a, ap)), scale)
}

/// `(X, Y, X)` with circulants `X = circ(1, a, a)`, `Y = circ(1, b, b)`.
pub fn triple_rho_ab(a: f64, b: f64) -> TripleXYZ {
    let circ = |v: f64| DMatrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { v });
    TripleXYZ::from_real(circ(a), circ(b), circ(a)).expect("valid by construction")
}

/// The LDOI state `rho(a, b)` on `C^3 ⊗ C^3`.
pub fn family_rho_ab(a: f64, b: f64, scale: Scale) -> HermitianMatrix {
    scaled(rho_from_triple(&triple_rho_ab(a, b)), scale)
}

/// Projector onto the Dicke vector `D_ij`: `(e_i ⊗ e_j + e_j ⊗ e_i)/sqrt(2)` for
/// `i != j` and `e_i ⊗ e_i` otherwise. Indices are 0-based.
pub fn dicke(n: usize, i: usize, j: usize) -> HermitianMatrix {
    assert!(i < n && j < n, "Dicke index out of range");
    let mut v = vec![Complex64::new(0.0, 0.0); n * n];
    if i == j {
        v[i * n + i] = Complex64::new(1.0, 0.0);
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        v[i * n + j] = Complex64::new(s, 0.0);
        v[j * n + i] = Complex64::new(s, 0.0);
    }
    HermitianMatrix::outer(&v, vec![n, n]).expect("registers match")
}
