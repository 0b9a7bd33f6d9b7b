#![allow(dead_code)]

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// `G G^*` with `G` of size `n^2 x k`, complex unless `real`.
pub fn wishart(rng: &mut ChaCha8Rng, n: usize, k: usize, real: bool) -> HermitianMatrix {
    let d = n * n;
    let g = DMatrix::from_fn(d, k, |_, _| Complex64::new(gauss(rng), if real { 0.0 } else { gauss(rng) }));
    HermitianMatrix::new(&g * g.adjoint(), vec![n, n]).unwrap()
}

/// Random state mixed with a multiple of the identity to land on either side
/// of the separability boundary.
pub fn random_state(rng: &mut ChaCha8Rng, n: usize, real: bool) -> HermitianMatrix {
    let k = rng.random_range(1..=n * n);
    let w = wishart(rng, n, k, real);
    let w = w.scale(1.0 / w.trace());
    let p = rng.random_range(0.0..0.6);
    let id = HermitianMatrix::identity(n * n, vec![n, n]).unwrap().scale(1.0 / (n * n) as f64);
    w.scale(1.0 - p).add(&id.scale(p))
}

/// Bose-symmetric state: symmetric-subspace compression of a random state.
pub fn random_bose(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let d = n * n;
    let swap = DMatrix::from_fn(d, d, |a, b| {
        let (i, j) = (a / n, a % n);
        if b == j * n + i {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let p = (DMatrix::identity(d, d) + swap) * Complex64::new(0.5, 0.0);
    let k = rng.random_range(1..=d);
    let g = DMatrix::from_fn(d, k, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    let m = &p * (&g * g.adjoint()) * &p;
    let h = HermitianMatrix::new(m, vec![n, n]).unwrap();
    let h = h.scale(1.0 / h.trace());
    let q = rng.random_range(0.0..0.5);
    let sym = HermitianMatrix::new(p.clone(), vec![n, n]).unwrap();
    let sym = sym.scale(1.0 / sym.trace());
    h.scale(1.0 - q).add(&sym.scale(q))
}
