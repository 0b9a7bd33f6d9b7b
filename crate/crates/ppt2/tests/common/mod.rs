use hermitian_core::Complex64;
use nalgebra::DMatrix;
use rand::Rng;
use states::TripleXYZ;

/// Random triple with complex Hermitian `Y`, `Z` sharing the diagonal of `X`.
pub fn random_triple<R: Rng>(rng: &mut R, n: usize) -> TripleXYZ {
    let x = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    random_triple_with(rng, x, false)
}

/// Random `Y`, `Z` for a given `X`; real symmetric when `real` is set.
pub fn random_triple_with<R: Rng>(rng: &mut R, x: DMatrix<f64>, real: bool) -> TripleXYZ {
    let n = x.nrows();
    let mut herm = || {
        let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            m[(i, i)] = Complex64::new(x[(i, i)], 0.0);
            for j in i + 1..n {
                let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
                let v = Complex64::new(rng.random_range(-1.0..1.0), im);
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    };
    let y = herm();
    let z = herm();
    TripleXYZ::new(x, y, z).unwrap()
}
