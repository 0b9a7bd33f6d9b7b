use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sdp::{read_sdpa, solve_feasibility, write_sdpa, LmiBlock, LmiProblem, SolveOptions, Verdict};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, density: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if rng.random_bool(density) {
                let v = gauss(rng);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    m
}

fn put(b: &mut LmiBlock, var: Option<usize>, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            if m[(i, j)] != 0.0 {
                match var {
                    None => b.add_constant(i, j, m[(i, j)]),
                    Some(v) => b.add_term(v, i, j, m[(i, j)]),
                }
            }
        }
    }
}

/// Blocks with `F_0 = S + I - sum_i y0_i F_i`, `S` PSD, so `B(y0) = S + I`.
fn strictly_feasible(rng: &mut ChaCha8Rng) -> LmiProblem {
    let m = rng.random_range(1..6);
    let nblocks = rng.random_range(1..4);
    let y0: Vec<f64> = (0..m).map(|_| gauss(rng)).collect();
    let mut p = LmiProblem::new(m);
    for _ in 0..nblocks {
        let n = rng.random_range(1..6);
        let g = DMatrix::from_fn(n, n, |_, _| gauss(rng));
        let mut f0 = &g * g.transpose() + DMatrix::identity(n, n);
        let mut b = LmiBlock::new(n);
        for (i, &yi) in y0.iter().enumerate() {
            let fi = random_sym(rng, n, 0.6);
            f0 -= &fi * yi;
            put(&mut b, Some(i), &fi);
        }
        put(&mut b, None, &f0);
        p.push(b);
    }
    p
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gauss(rng));
    g.qr().q()
}

#[test]
fn strictly_feasible_problems_are_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..50 {
        let p = strictly_feasible(&mut rng);
        let r = solve_feasibility(&p, &SolveOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Feasible, "problem {k}: {r:?}");
        assert!(r.margin <= -1e-7);
    }
}

#[test]
fn margin_invariant_under_orthogonal_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let opts = SolveOptions { lambda_cap: 100.0, ..Default::default() };
    for k in 0..20 {
        // Mix feasible and infeasible instances by shifting F_0.
        let mut p = strictly_feasible(&mut rng);
        let shift = rng.random_range(-3.0..1.0);
        for b in &mut p.blocks {
            for i in 0..b.dim {
                b.add_constant(i, i, shift);
            }
        }
        let qs: Vec<DMatrix<f64>> = p.blocks.iter().map(|b| random_orthogonal(&mut rng, b.dim)).collect();
        let a = solve_feasibility(&p, &opts).unwrap();
        let c = solve_feasibility(&p.conjugated(&qs), &opts).unwrap();
        assert!((a.margin - c.margin).abs() < 1e-6, "problem {k}: {} vs {}", a.margin, c.margin);
    }
}

#[test]
fn solver_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..10 {
        let p = strictly_feasible(&mut rng);
        let a = solve_feasibility(&p, &SolveOptions::default()).unwrap();
        let b = solve_feasibility(&p, &SolveOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn infeasible_shift_gives_positive_margin() {
    // B(y) = diag(y, -1 - y) has margin 1/2 at y = -1/2.
    let mut p = LmiProblem::new(1);
    let mut b = LmiBlock::new(2);
    b.add_term(0, 0, 0, 1.0);
    b.add_term(0, 1, 1, -1.0);
    b.add_constant(1, 1, -1.0);
    p.push(b);
    let r = solve_feasibility(&p, &SolveOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Infeasible);
    assert!((r.margin - 0.5).abs() < 1e-7);
    assert!((r.y[0] + 0.5).abs() < 1e-5);
}

#[test]
fn weighted_margin() {
    // diag(1 - y, y - 3) with weights (1, 2): margin = 2/3 at y = 5/3... solve
    // 1 - y + l = 0, y - 3 + 2 l = 0 gives l = 2/3.
    let mut p = LmiProblem::new(1);
    let mut b = LmiBlock::new(2);
    b.add_constant(0, 0, 1.0);
    b.add_term(0, 0, 0, -1.0);
    b.add_constant(1, 1, -3.0);
    b.add_term(0, 1, 1, 1.0);
    p.push(b.with_margin_weights(vec![1.0, 2.0]));
    let r = solve_feasibility(&p, &SolveOptions::default()).unwrap();
    assert!((r.margin - 2.0 / 3.0).abs() < 1e-7, "{r:?}");
}

fn arb_problem() -> impl Strategy<Value = LmiProblem> {
    (0usize..4, prop::collection::vec(1usize..5, 1..4), any::<u64>()).prop_map(|(m, dims, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = LmiProblem::new(m);
        for n in dims {
            let mut b = LmiBlock::new(n);
            for var in 0..=m {
                let f = random_sym(&mut rng, n, 0.5).map(|v| v * 10f64.powi(rng.random_range(-8..8)));
                put(&mut b, var.checked_sub(1), &f);
            }
            p.push(b);
        }
        p
    })
}

proptest! {
    #[test]
    fn sdpa_round_trip_is_bit_exact(p in arb_problem()) {
        let c: Vec<f64> = (0..p.num_vars).map(|i| 0.1 * i as f64 - 1.0 / 3.0).collect();
        let mut buf = Vec::new();
        write_sdpa(&p, Some(&c), &mut buf).unwrap();
        let (q, c2) = read_sdpa(buf.as_slice()).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(c2.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), c.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let mut again = Vec::new();
        write_sdpa(&q, Some(&c2), &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}
