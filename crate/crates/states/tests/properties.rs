use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DMatrix;
use patterns::Regime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use states::{project, rho_from_triple, triple_from_rho, witness_matrix, TripleXYZ, WitnessPair, LDOI_TOL};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    (&g + g.adjoint()).map(|v| v * 0.5)
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let g = DMatrix::from_fn(n * n, n * n, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    HermitianMatrix::new(&g * g.adjoint(), vec![n, n]).unwrap()
}

fn random_triple(rng: &mut ChaCha8Rng, n: usize) -> TripleXYZ {
    let x = DMatrix::from_fn(n, n, |_, _| gauss(rng));
    let mut y = random_hermitian(rng, n);
    let mut z = random_hermitian(rng, n);
    for i in 0..n {
        y[(i, i)] = Complex64::new(x[(i, i)], 0.0);
        z[(i, i)] = Complex64::new(x[(i, i)], 0.0);
    }
    TripleXYZ::new(x, y, z).unwrap()
}

/// Conjugation by `D ⊗ E` for diagonal unitaries given by their diagonals.
fn conjugate_diag(rho: &HermitianMatrix, d: &[Complex64], e: &[Complex64]) -> DMatrix<Complex64> {
    let n = d.len();
    DMatrix::from_fn(n * n, n * n, |a, b| d[a / n] * e[a % n] * rho.get(a, b) * (d[b / n] * e[b % n]).conj())
}

/// Average over the group generated by `U_k = diag(1, .., i, .., 1)`,
/// `k < n - 1`, acting as `U ⊗ conj(U)` (or `U ⊗ U`).
fn group_average(rho: &HermitianMatrix, conj_second: bool) -> HermitianMatrix {
    let n = rho.registers()[0];
    let count = 4usize.pow(n as u32 - 1);
    let mut acc = DMatrix::zeros(n * n, n * n);
    for code in 0..count {
        let mut c = code;
        let u: Vec<Complex64> = (0..n)
            .map(|k| {
                if k + 1 == n {
                    return Complex64::new(1.0, 0.0);
                }
                let p = c % 4;
                c /= 4;
                Complex64::new(0.0, 1.0).powu(p as u32)
            })
            .collect();
        let v: Vec<Complex64> = if conj_second { u.iter().map(|z| z.conj()).collect() } else { u.clone() };
        acc += conjugate_diag(rho, &u, &v);
    }
    HermitianMatrix::new(acc / Complex64::new(count as f64, 0.0), vec![n, n]).unwrap()
}

/// Average over the `2^n` diagonal sign matrices acting as `O ⊗ O`.
fn sign_average(rho: &HermitianMatrix) -> HermitianMatrix {
    let n = rho.registers()[0];
    let mut acc = DMatrix::zeros(n * n, n * n);
    for mask in 0..1usize << n {
        let o: Vec<Complex64> =
            (0..n).map(|k| Complex64::new(if mask >> k & 1 == 1 { -1.0 } else { 1.0 }, 0.0)).collect();
        acc += conjugate_diag(rho, &o, &o);
    }
    HermitianMatrix::new(acc / Complex64::new((1usize << n) as f64, 0.0), vec![n, n]).unwrap()
}

/// The single-generator average `1/(n-1) sum_k (U_k ⊗ conj U_k) rho (..)^*`.
fn generator_average(rho: &HermitianMatrix) -> HermitianMatrix {
    let n = rho.registers()[0];
    let mut acc = DMatrix::zeros(n * n, n * n);
    for k in 0..n - 1 {
        let u: Vec<Complex64> =
            (0..n).map(|p| if p == k { Complex64::new(0.0, 1.0) } else { Complex64::new(1.0, 0.0) }).collect();
        let v: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        acc += conjugate_diag(rho, &u, &v);
    }
    HermitianMatrix::new(acc / Complex64::new((n - 1) as f64, 0.0), vec![n, n]).unwrap()
}

#[test]
fn masking_equals_finite_group_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let n = 3 + k % 2;
        let rho = random_state(&mut rng, n);
        let cl = project(&rho, Regime::Cldui).unwrap();
        let ld = project(&rho, Regime::Ldui).unwrap();
        let lo = project(&rho, Regime::Ldoi).unwrap();
        assert!(cl.max_abs_diff(&group_average(&rho, true)) < 1e-10);
        assert!(ld.max_abs_diff(&group_average(&rho, false)) < 1e-10);
        assert!(lo.max_abs_diff(&sign_average(&rho)) < 1e-10);
    }
}

#[test]
fn single_generator_average_is_not_the_projection() {
    // Entry (12, 21) picks up the phase u_1^2 conj(u_2)^2 = -1 under every
    // generator, so the n-1 term average negates it instead of removing it.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = random_state(&mut rng, 3);
    let avg = generator_average(&rho);
    let (a, b) = (1, 3);
    assert!(((avg.get(a, b)) + rho.get(a, b)).norm() < 1e-12);
    assert_eq!(project(&rho, Regime::Cldui).unwrap().get(a, b), Complex64::new(0.0, 0.0));
}

#[test]
fn projections_idempotent_trace_preserving_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..30 {
        let n = 2 + k % 3;
        let rho = random_state(&mut rng, n);
        for r in [Regime::Cldui, Regime::Ldui, Regime::Ldoi] {
            let p = project(&rho, r).unwrap();
            assert_eq!(project(&p, r).unwrap(), p);
            assert!((p.trace() - rho.trace()).abs() < 1e-10 * rho.trace());
            assert!(p.is_psd());
        }
    }
}

#[test]
fn cldui_projection_commutes_with_partial_transpose() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for k in 0..20 {
        let n = 2 + k % 3;
        let rho = random_state(&mut rng, n);
        let lhs = project(&rho, Regime::Cldui).unwrap().partial_transpose(&[1]).unwrap();
        let rhs = project(&rho.partial_transpose(&[1]).unwrap(), Regime::Ldui).unwrap();
        assert_eq!(lhs.max_abs_diff(&rhs), 0.0);
    }
}

#[test]
fn triple_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for k in 0..50 {
        let n = 1 + k % 5;
        let t = random_triple(&mut rng, n);
        let rho = rho_from_triple(&t);
        let back = triple_from_rho(&rho, LDOI_TOL).unwrap();
        assert!(back.max_abs_diff(&t) < 1e-15);
        assert_eq!(rho_from_triple(&back), rho);
    }
}

#[test]
fn partial_transpose_swaps_y_and_z() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for n in 2..5 {
        let t = random_triple(&mut rng, n);
        let swapped = TripleXYZ::new(t.x().clone(), t.z().clone(), t.y().clone()).unwrap();
        let pt = rho_from_triple(&t).partial_transpose(&[1]).unwrap();
        assert!(pt.max_abs_diff(&rho_from_triple(&swapped)) < 1e-15);
    }
}

#[test]
fn blockwise_psd_criterion() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut agree_psd = 0;
    for k in 0..100 {
        let n = 2 + k % 3;
        // Mix in PSD-leaning instances so both outcomes occur.
        let mut t = random_triple(&mut rng, n);
        if rng.random_bool(0.5) {
            let g = DMatrix::from_fn(n, n, |_, _| Complex64::new(gauss(&mut rng), gauss(&mut rng)));
            let y = &g * g.adjoint();
            let x = DMatrix::from_fn(n, n, |i, j| if i == j { y[(i, i)].re } else { 2.0 + gauss(&mut rng).abs() });
            let z =
                DMatrix::from_fn(
                    n,
                    n,
                    |i, j| if i == j { Complex64::new(x[(i, i)], 0.0) } else { Complex64::new(0.0, 0.0) },
                );
            t = TripleXYZ::new(x, y, z).unwrap();
        }
        let full = HermitianMatrix::is_psd(&rho_from_triple(&t));
        let y_ok = HermitianMatrix::new(t.y().clone(), vec![]).unwrap().is_psd();
        let mut blocks_ok = true;
        for i in 0..n {
            for j in i + 1..n {
                let b = DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        Complex64::new(t.x()[(i, j)], 0.0),
                        t.z()[(i, j)],
                        t.z()[(j, i)],
                        Complex64::new(t.x()[(j, i)], 0.0),
                    ],
                );
                blocks_ok &= HermitianMatrix::new(b, vec![]).unwrap().is_psd();
            }
        }
        assert_eq!(full, y_ok && blocks_ok, "instance {k}");
        agree_psd += full as usize;
    }
    assert!(agree_psd > 0 && agree_psd < 100);
}

#[test]
fn witness_pairing_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..50 {
        let n = 1 + k % 4;
        let s = DMatrix::from_fn(n, n, |_, _| gauss(&mut rng));
        let tm = random_hermitian(&mut rng, n);
        let x = DMatrix::from_fn(n, n, |_, _| gauss(&mut rng));
        let mut y = random_hermitian(&mut rng, n);
        for i in 0..n {
            y[(i, i)] = Complex64::new(x[(i, i)], 0.0);
        }
        let rho = rho_from_triple(&TripleXYZ::from_pair(x.clone(), y.clone()).unwrap());
        let m = witness_matrix(&WitnessPair { s: s.clone(), t: tm.clone() });
        let sx: f64 = s.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        let ty: f64 = tm.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        assert!((m.inner(&rho) - sx - ty).abs() < 1e-10 * (1.0 + sx.abs() + ty.abs()));
        assert!(states::has_support(&m, Regime::Cldui, 0.0).unwrap());
    }
}
