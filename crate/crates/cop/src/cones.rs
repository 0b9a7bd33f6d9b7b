//! Inner approximations of the copositive cone.

use std::collections::BTreeMap;
use std::time::Instant;

use hermitian_core::par::{map_range, Exec};
use hermitian_core::RealSymmetric;
use patterns::{exponents, multinomial, ExponentVec};
use sdp::{SolveOptions, Status, Verdict};
use serde::Serialize;

use crate::affine::{ABlock, AffineLmi};
use crate::CopError;

/// Facial-reduction rounds allowed after a boundary verdict.
const REDUCTIONS: usize = 3;

/// Outcome of a cone membership test.
#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub verdict: Verdict,
    /// Margin of the full problem.
    pub margin: f64,
    /// Margin on the face found by facial reduction, if it ran.
    pub face_margin: Option<f64>,
    pub reductions: usize,
    pub status: Status,
    pub iterations: usize,
    pub block_sizes: Vec<usize>,
    pub seconds: f64,
}

fn report(out: crate::affine::AffineOutcome, start: Instant) -> ConeReport {
    ConeReport {
        verdict: out.verdict,
        margin: out.margin,
        face_margin: out.face_margin,
        reductions: out.reductions,
        status: out.status,
        iterations: out.iterations,
        block_sizes: out.block_sizes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Standard Horn matrix: copositive, in `K^(1)` but not in `K^(0)`.
pub fn horn() -> RealSymmetric {
    #[rustfmt::skip]
    let h = [
         1.0, -1.0,  1.0,  1.0, -1.0,
        -1.0,  1.0, -1.0,  1.0,  1.0,
         1.0, -1.0,  1.0, -1.0,  1.0,
         1.0,  1.0, -1.0,  1.0, -1.0,
        -1.0,  1.0,  1.0, -1.0,  1.0,
    ];
    RealSymmetric::from_fn(5, |i, j| h[5 * i + j]).expect("symmetric")
}

/// Tests `A = P + N` with `P ⪰ 0` and `N ≥ 0` entrywise.
pub fn k0_membership(a: &RealSymmetric, opts: &SolveOptions) -> Result<ConeReport, CopError> {
    let start = Instant::now();
    let n = a.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut lmi = AffineLmi::new(pairs.len());
    let mut p = ABlock::zero(n, pairs.len());
    p.c = a.matrix().clone();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        p.f[k][(i, j)] = -1.0;
        p.f[k][(j, i)] = -1.0;
        let mut nk = ABlock::zero(1, pairs.len());
        nk.f[k][(0, 0)] = 1.0;
        lmi.blocks.push(nk);
    }
    lmi.blocks.insert(0, p);
    Ok(report(lmi.solve(opts, REDUCTIONS)?, start))
}

/// Gram-matrix model of `||x||^{2t} (x∘x)^T A (x∘x)`.
///
/// Every monomial of the form has even exponents, so the form is invariant
/// under each sign flip `x_i -> -x_i`. The Gram matrix on degree-`t + 2`
/// monomials can then be taken block diagonal by exponent parity class.
#[derive(Clone, Debug)]
pub struct SosModel {
    pub n: usize,
    pub t: usize,
    /// Monomials of each Gram block.
    pub blocks: Vec<Vec<ExponentVec>>,
    /// Coefficient of every degree-`2t + 4` monomial `x^{2 nu}`, keyed by `nu`.
    pub coefficients: BTreeMap<ExponentVec, f64>,
    /// For each `nu`, the Gram entries `(block, r, c)` with `r <= c` whose
    /// monomial product is `x^{2 nu}`.
    pub matches: BTreeMap<ExponentVec, Vec<(usize, usize, usize)>>,
}

impl SosModel {
    pub fn new(a: &RealSymmetric, t: usize) -> Self {
        let n = a.dim();
        let mut classes: BTreeMap<Vec<u16>, Vec<ExponentVec>> = BTreeMap::new();
        for m in exponents(n, t + 2) {
            classes.entry(m.0.iter().map(|e| e % 2).collect()).or_default().push(m);
        }
        let blocks: Vec<Vec<ExponentVec>> = classes.into_values().collect();

        let mut coefficients = BTreeMap::new();
        for nu in exponents(n, t + 2) {
            let mut c = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let mut mu = nu.clone();
                    if mu.0[i] == 0 {
                        continue;
                    }
                    mu.0[i] -= 1;
                    if mu.0[j] == 0 {
                        continue;
                    }
                    mu.0[j] -= 1;
                    c += a.get(i, j) * multinomial(&mu) as f64;
                }
            }
            coefficients.insert(nu, c);
        }

        let mut matches: BTreeMap<ExponentVec, Vec<(usize, usize, usize)>> = BTreeMap::new();
        for (b, mons) in blocks.iter().enumerate() {
            for r in 0..mons.len() {
                for c in r..mons.len() {
                    // Same parity class, so the sum is even.
                    let nu = ExponentVec(mons[r].0.iter().zip(&mons[c].0).map(|(x, y)| (x + y) / 2).collect());
                    matches.entry(nu).or_default().push((b, r, c));
                }
            }
        }
        Self { n, t, blocks, coefficients, matches }
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    fn to_lmi(&self) -> AffineLmi {
        let mut var = BTreeMap::new();
        for (b, mons) in self.blocks.iter().enumerate() {
            for r in 0..mons.len() {
                for c in r..mons.len() {
                    let k = var.len();
                    var.insert((b, r, c), k);
                }
            }
        }
        let mut lmi = AffineLmi::new(var.len());
        for (b, mons) in self.blocks.iter().enumerate() {
            let mut blk = ABlock::zero(mons.len(), var.len());
            for r in 0..mons.len() {
                for c in r..mons.len() {
                    let k = var[&(b, r, c)];
                    blk.f[k][(r, c)] = 1.0;
                    blk.f[k][(c, r)] = 1.0;
                }
            }
            lmi.blocks.push(blk);
        }
        for (nu, coef) in &self.coefficients {
            let terms: Vec<(usize, f64)> = self
                .matches
                .get(nu)
                .into_iter()
                .flatten()
                .map(|&(b, r, c)| (var[&(b, r, c)], if r == c { 1.0 } else { 2.0 }))
                .collect();
            lmi.equality(&terms, *coef);
        }
        lmi
    }
}

/// Tests `A ∈ K^(t)`: `||x||^{2t} (x∘x)^T A (x∘x)` is a sum of squares.
pub fn kt_membership(a: &RealSymmetric, t: usize, opts: &SolveOptions) -> Result<ConeReport, CopError> {
    let start = Instant::now();
    let model = SosModel::new(a, t);
    Ok(report(model.to_lmi().solve(opts, REDUCTIONS)?, start))
}

/// Minimum of `x^T A x` over the simplex points whose coordinates are
/// multiples of `1/d` for some `d <= grid_depth`.
///
/// # Panics
/// When `A` is larger than 6x6 or `grid_depth` is zero.
pub fn copositive_brute_oracle(a: &RealSymmetric, grid_depth: usize, exec: Exec) -> f64 {
    let n = a.dim();
    assert!((1..=6).contains(&n), "brute-force oracle supports 1 <= n <= 6");
    assert!(grid_depth >= 1, "grid depth must be positive");
    let mins = map_range(exec, grid_depth, |k| {
        let d = k + 1;
        let mut best = f64::INFINITY;
        for x in exponents(n, d) {
            let mut q = 0.0;
            for i in 0..n {
                if x.0[i] == 0 {
                    continue;
                }
                for j in 0..n {
                    q += a.get(i, j) * x.0[i] as f64 * x.0[j] as f64;
                }
            }
            best = best.min(q / (d * d) as f64);
        }
        best
    });
    mins.into_iter().fold(f64::INFINITY, f64::min)
}
