use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, registers: Vec<usize>) -> HermitianMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let adj = g.adjoint();
    HermitianMatrix::new(g + adj, registers).unwrap()
}

fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_involution(regs in shape_strategy(), seed in any::<u64>(), pick in any::<u8>()) {
        let dim = regs.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, dim, regs.clone());
        let subset: Vec<usize> = (0..regs.len()).filter(|r| pick >> r & 1 == 1).collect();
        let twice = m.partial_transpose(&subset).unwrap().partial_transpose(&subset).unwrap();
        prop_assert_eq!(twice.max_abs_diff(&m), 0.0);
    }

    #[test]
    fn partial_transpose_keeps_hermiticity_and_trace(regs in shape_strategy(), seed in any::<u64>(), pick in any::<u8>()) {
        let dim = regs.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, dim, regs.clone());
        let subset: Vec<usize> = (0..regs.len()).filter(|r| pick >> r & 1 == 1).collect();
        let pt = m.partial_transpose(&subset).unwrap();
        let adj = pt.matrix().adjoint();
        prop_assert!((pt.matrix() - adj).iter().all(|z| z.norm() < 1e-14));
        prop_assert!((pt.trace() - m.trace()).abs() < 1e-12 * (1.0 + m.trace().abs()));
    }

    #[test]
    fn partial_trace_keeps_trace(regs in shape_strategy(), seed in any::<u64>(), pick in any::<u8>()) {
        let dim = regs.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, dim, regs.clone());
        let subset: Vec<usize> = (0..regs.len()).filter(|r| pick >> r & 1 == 1).collect();
        let tr = m.partial_trace(&subset).unwrap();
        prop_assert!((tr.trace() - m.trace()).abs() < 1e-10 * (1.0 + m.frobenius_norm()));
    }
}

#[test]
fn embedding_min_eigenvalue_matches_complex_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..100 {
        let dim = 1 + k % 16;
        let m = random_hermitian(&mut rng, dim, vec![]);
        let (values, _) = m.eigh();
        let embedded = m.real_embedding().min_eigenvalue();
        assert!((embedded - values[0]).abs() < 1e-9, "dim {dim}: {embedded} vs {}", values[0]);
        assert!((m.min_eigenvalue() - values[0]).abs() < 1e-9);
    }
}

#[test]
fn embedding_doubles_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_hermitian(&mut rng, 6, vec![]);
    let (values, _) = m.eigh();
    let doubled = m.real_embedding().eigenvalues();
    for (k, v) in values.iter().enumerate() {
        assert!((doubled[2 * k] - v).abs() < 1e-10);
        assert!((doubled[2 * k + 1] - v).abs() < 1e-10);
    }
}

#[test]
fn identity_is_fixed_by_every_partial_transpose() {
    let id = HermitianMatrix::identity(12, vec![2, 3, 2]).unwrap();
    for subset in [vec![], vec![0], vec![1, 2], vec![0, 1, 2]] {
        assert_eq!(id.partial_transpose(&subset).unwrap(), id);
    }
}
