//! Diagonal-orthogonal covariant maps and their composition.

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DMatrix;
use states::{StateError, TripleXYZ};

use crate::Ppt2Error;

/// `(X1, Y1, Z1) • (X2, Y2, Z2)`: the triple whose map is `Phi_1 ∘ Phi_2`.
///
/// The diagonals of `Y3` and `Z3` are set to `diag(X1 X2)` directly, which is
/// what the corrections `DY3`, `DZ3` achieve, so the result satisfies the
/// diagonal invariant without roundoff.
pub fn compose(t1: &TripleXYZ, t2: &TripleXYZ) -> Result<TripleXYZ, Ppt2Error> {
    let n = t1.n();
    if t2.n() != n {
        return Err(Ppt2Error::Dimension { left: n, right: t2.n() });
    }
    let x = t1.x() * t2.x();
    let (y1, z1, y2, z2) = (t1.y(), t1.z(), t2.y(), t2.z());
    let mut y = y1.component_mul(y2) + z1.component_mul(&z2.transpose());
    let mut z = y1.component_mul(z2) + z1.component_mul(&y2.transpose());
    for i in 0..n {
        let d = Complex64::new(x[(i, i)], 0.0);
        y[(i, i)] = d;
        z[(i, i)] = d;
    }
    Ok(TripleXYZ::new(x, y, z)?)
}

/// `Phi(M) = Diag(X diag(M)) + Y0 ∘ M + Z0 ∘ M^T`, with `Y0`, `Z0` the
/// off-diagonal parts.
pub fn apply_choi_map(t: &TripleXYZ, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.n();
    assert_eq!(m.shape(), (n, n), "map input must be {n}x{n}");
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut d = Complex64::new(0.0, 0.0);
        for j in 0..n {
            d += m[(j, j)] * t.x()[(i, j)];
        }
        out[(i, i)] = d;
        for j in 0..n {
            if i != j {
                out[(i, j)] = t.y()[(i, j)] * m[(i, j)] + t.z()[(i, j)] * m[(j, i)];
            }
        }
    }
    out
}

/// Choi matrix `sum_{r,s} Phi(e_r e_s*) ⊗ e_r e_s*` of a map on `n x n` matrices.
pub fn choi_matrix<F>(n: usize, phi: F) -> Result<HermitianMatrix, StateError>
where
    F: Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>,
{
    let mut j = DMatrix::zeros(n * n, n * n);
    for r in 0..n {
        for s in 0..n {
            let mut e = DMatrix::zeros(n, n);
            e[(r, s)] = Complex64::new(1.0, 0.0);
            let img = phi(&e);
            for a in 0..n {
                for b in 0..n {
                    j[(a * n + r, b * n + s)] = img[(a, b)];
                }
            }
        }
    }
    Ok(HermitianMatrix::new(j, vec![n, n])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use states::rho_from_triple;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn zero_triple_annihilates() {
        let t = TripleXYZ::from_real(
            DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64),
            DMatrix::from_fn(3, 3, |i, j| if i == j { (3 * i) as f64 } else { 0.5 }),
            DMatrix::from_fn(3, 3, |i, j| if i == j { (3 * i) as f64 } else { -0.25 }),
        )
        .unwrap();
        let z = TripleXYZ::zeros(3);
        assert_eq!(compose(&z, &t).unwrap(), z);
        assert_eq!(compose(&t, &z).unwrap(), z);
    }

    #[test]
    fn all_ones_composition() {
        let j = DMatrix::from_element(3, 3, 1.0);
        let t = TripleXYZ::from_real(j.clone(), j.clone(), j.clone()).unwrap();
        let r = compose(&t, &t).unwrap();
        let want =
            TripleXYZ::from_real(&j * 3.0, &j * 2.0 + DMatrix::identity(3, 3), &j * 2.0 + DMatrix::identity(3, 3))
                .unwrap();
        assert_eq!(r, want);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(compose(&TripleXYZ::zeros(2), &TripleXYZ::zeros(3)).is_err());
    }

    #[test]
    fn diagonal_inputs_map_to_columns_of_x() {
        let x = DMatrix::from_fn(3, 3, |i, j| 1.0 + (i * 3 + j) as f64);
        let t = TripleXYZ::from_pair(x.clone(), DMatrix::from_fn(3, 3, |i, j| c(if i == j { x[(i, i)] } else { 0.0 })))
            .unwrap();
        for j in 0..3 {
            let mut e = DMatrix::zeros(3, 3);
            e[(j, j)] = c(1.0);
            let img = apply_choi_map(&t, &e);
            assert_eq!(img, DMatrix::from_diagonal(&x.column(j).map(c)));
        }
    }

    #[test]
    fn identity_triple_keeps_the_diagonal() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        let t = TripleXYZ::from_real(i3.clone(), i3.clone(), i3).unwrap();
        let m = DMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 1.0));
        assert_eq!(apply_choi_map(&t, &m), DMatrix::from_diagonal(&m.diagonal()));
    }

    #[test]
    fn choi_of_ldoi_map_is_the_state() {
        let t = states::triple_rho_aap(2.0, 0.5);
        let j = choi_matrix(t.n(), |m| apply_choi_map(&t, m)).unwrap();
        assert_eq!(j.max_abs_diff(&rho_from_triple(&t)), 0.0);
    }
}
