//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when any criterion fails, except for the tensor clique-size
//! bound, which is false at `t = 2`; that sub-check prints FAIL and the run
//! instead asserts that the known counterexample is exactly what fails.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use hermitian_core::par::Exec;
use hermitian_core::{Complex64, HermitianMatrix, RealSymmetric};
use nalgebra::DMatrix;
use patterns::{format_seq, moment_block_layout, tensor_block_layout, Regime};
use ppt2::{apply_choi_map, choi_matrix, compose, run_experiment, ExperimentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use relax::{build_dps_moment, check_membership, solve_model, verify_certificate, Formalism, Hierarchy, ModelOptions};
use sdp::{SolveOptions, Verdict};
use serde_json::Value;
use states::{project, rho_from_triple, TripleXYZ};

const MOMENT_TABLE: &str = include_str!("../../patterns/tests/data/moment_block_sizes.txt");

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn report(id: &str, name: &str, start: Instant, r: Result<Outcome>) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match r {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e:#}")),
    };
    println!("{} {id:>4}  {name} ({secs:.2} s): {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn within(start: Instant, limit: f64, what: &str) -> Result<()> {
    let s = start.elapsed().as_secs_f64();
    ensure!(s < limit, "{what} took {s:.2} s, limit {limit} s");
    Ok(())
}

fn dpskit(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::main_with(std::iter::once("dpskit").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

// ---------------------------------------------------------------- 1

type Cell = (String, usize, usize);

fn printed_tables() -> BTreeMap<Cell, BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for line in MOMENT_TABLE.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (head, sizes) = line.split_once(':').unwrap();
        let head: Vec<&str> = head.split_whitespace().collect();
        let cell = (head[0].to_string(), head[1].parse().unwrap(), head[2].parse().unwrap());
        let sizes = sizes
            .split_whitespace()
            .map(|tok| {
                let (s, m) = tok.split_once('_').unwrap();
                (s.parse().unwrap(), m.parse().unwrap())
            })
            .collect();
        out.insert(cell, sizes);
    }
    out
}

fn block_tables() -> Result<Outcome> {
    let start = Instant::now();
    let (code, csv, err) = dpskit(&["tables", "--n-range", "3-5", "--t-range", "2-7", "--regime", "all"]);
    ensure!(code == 0, "exit {code}: {err}");
    let mut computed: BTreeMap<Cell, BTreeMap<usize, usize>> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        ensure!(f.len() == 5, "bad row {line:?}");
        let (n, t): (usize, usize) = (f[1].parse()?, f[2].parse()?);
        computed.entry((f[0].to_string(), t, n)).or_default().insert(f[3].parse()?, f[4].parse()?);
    }
    within(start, 10.0, "tables")?;
    let printed = printed_tables();
    let bad: Vec<String> = printed
        .iter()
        .filter(|(cell, sizes)| computed.get(*cell) != Some(sizes))
        .map(|(cell, _)| format!("{cell:?}"))
        .collect();
    ensure!(computed.len() == printed.len(), "computed {} cells, printed {}", computed.len(), printed.len());
    Ok(Outcome::new(bad.is_empty(), format!("{} cells compared, mismatched: {bad:?}", printed.len())))
}

// ---------------------------------------------------------------- 2

fn sorted_cliques(cliques: &[&[&str]]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = cliques
        .iter()
        .map(|c| {
            let mut m: Vec<String> = c.iter().map(|s| s.to_string()).collect();
            m.sort();
            m
        })
        .collect();
    out.sort();
    out
}

fn tensor_cliques() -> Result<Outcome> {
    let start = Instant::now();
    let want: [Vec<Vec<String>>; 3] = [
        sorted_cliques(&[
            &["111", "212", "221", "313", "331"],
            &["222", "121", "112", "323", "332"],
            &["333", "131", "113", "232", "223"],
            &["123", "132"],
            &["213", "231"],
            &["312", "321"],
            &["122"],
            &["133"],
            &["211"],
            &["233"],
            &["311"],
            &["322"],
        ]),
        sorted_cliques(&[
            &["111", "122", "133", "212", "313"],
            &["222", "211", "233", "121", "323"],
            &["333", "311", "322", "131", "232"],
            &["123", "213"],
            &["231", "321"],
            &["312", "132"],
            &["112"],
            &["113"],
            &["221"],
            &["223"],
            &["331"],
            &["332"],
        ]),
        sorted_cliques(&[
            &["123", "132", "213", "231", "312", "321"],
            &["122", "212", "221"],
            &["133", "313", "331"],
            &["211", "121", "112"],
            &["233", "323", "332"],
            &["311", "131", "113"],
            &["322", "232", "223"],
            &["111"],
            &["222"],
            &["333"],
        ]),
    ];
    let mut bad = Vec::new();
    for (s, want) in want.iter().enumerate() {
        let layout = tensor_block_layout(3, 2, s, Regime::Cldui)?;
        let mut got: Vec<Vec<String>> = layout
            .cliques
            .iter()
            .map(|c| {
                let mut m: Vec<String> = c.members.iter().map(|x| format_seq(x)).collect();
                m.sort();
                m
            })
            .collect();
        got.sort();
        if &got != want {
            bad.push(s);
        }
    }
    within(start, 1.0, "clique layouts")?;
    Ok(Outcome::new(bad.is_empty(), format!("s = 0, 1, 2; mismatched s: {bad:?}")))
}

// ---------------------------------------------------------------- 3, 4

struct Check {
    verdict: String,
    margin: f64,
    seconds: f64,
}

fn check(family: &str, t: usize) -> Result<Check> {
    let t = t.to_string();
    let (code, out, err) = dpskit(&["check", "--family", family, "--t", &t]);
    ensure!(code != cli::EXIT_ERROR, "{family} t={t}: {err}");
    let v: Value = serde_json::from_str(&out)?;
    Ok(Check {
        verdict: v["verdict"].as_str().context("verdict")?.to_string(),
        margin: v["margin"].as_f64().context("margin")?,
        seconds: v["seconds"].as_f64().context("seconds")?,
    })
}

fn classify(cases: &[(&str, usize, &str)], limit: f64, min_margin: Option<f64>) -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut notes = Vec::new();
    for &(family, t, want) in cases {
        let start = Instant::now();
        let c = check(family, t)?;
        let wall = start.elapsed().as_secs_f64();
        notes.push(format!("{family}@{t} {} {:+.2e}", c.verdict, c.margin));
        if c.verdict != want {
            bad.push(format!("{family}@{t}: {} (want {want})", c.verdict));
        }
        if min_margin.is_some_and(|m| c.margin.abs() <= m) {
            bad.push(format!("{family}@{t}: |margin| {:e}", c.margin.abs()));
        }
        if wall >= limit {
            bad.push(format!("{family}@{t}: {wall:.2} s (solve {:.2} s)", c.seconds));
        }
    }
    if bad.is_empty() {
        Ok(Outcome::new(true, notes.join("; ")))
    } else {
        Ok(Outcome::new(false, bad.join("; ")))
    }
}

fn rho_aap_grid() -> Result<Outcome> {
    classify(
        &[
            ("rho_aap:3,0.5", 1, "Feasible"),
            ("rho_aap:3,0.5", 2, "Infeasible"),
            ("rho_aap:2,0.4", 1, "Infeasible"),
            ("rho_aap:2,2", 1, "Feasible"),
            ("rho_aap:2,2", 2, "Feasible"),
            ("rho_aap:1.5,1.5", 1, "Feasible"),
            ("rho_aap:1.5,1.5", 2, "Feasible"),
        ],
        5.0,
        Some(1e-6),
    )
}

fn rho_ab_grid() -> Result<Outcome> {
    classify(
        &[
            ("rho_ab:0.5,0.25", 1, "Feasible"),
            ("rho_ab:0.3,0.5", 1, "Infeasible"),
            ("rho_ab:0.6,-0.6", 1, "Infeasible"),
        ],
        1.0,
        None,
    )
}

// ---------------------------------------------------------------- 5

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let d = n * n;
    let k = rng.random_range(1..=d);
    let g = DMatrix::from_fn(d, k, |_, _| Complex64::new(gauss(rng), gauss(rng)));
    let w = HermitianMatrix::new(&g * g.adjoint(), vec![n, n]).unwrap();
    let w = w.scale(1.0 / w.trace());
    let p = rng.random_range(0.0..0.6);
    let id = HermitianMatrix::identity(d, vec![n, n]).unwrap().scale(1.0 / d as f64);
    w.scale(1.0 - p).add(&id.scale(p))
}

fn formalism_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mopts, sopts) = (ModelOptions::default(), SolveOptions::default());
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for k in 0..20 {
        let rho = random_state(&mut rng, 3);
        for (regime, state) in [(Regime::Generic, rho.clone()), (Regime::Cldui, project(&rho, Regime::Cldui)?)] {
            let m = check_membership(&state, 2, regime, Hierarchy::Dps, Formalism::Moment, &mopts, &sopts)?;
            let t = check_membership(&state, 2, regime, Hierarchy::Dps, Formalism::Tensor, &mopts, &sopts)?;
            let gap = (m.margin - t.margin).abs();
            worst = worst.max(gap);
            *counts.entry(format!("{regime}:{:?}", m.verdict)).or_default() += 1;
            if m.verdict != t.verdict || gap >= 1e-6 {
                bad.push(format!("state {k} {regime}: {:?}/{:?}, gap {gap:e}", m.verdict, t.verdict));
            }
        }
    }
    within(start, 120.0, "formalism comparison")?;
    Ok(Outcome::new(bad.is_empty(), format!("40 pairs, max margin gap {worst:.1e}, verdicts {counts:?} {bad:?}")))
}

// ---------------------------------------------------------------- 6, 7, 8

fn horn_bracket() -> Result<Outcome> {
    let start = Instant::now();
    let (code, out, err) = dpskit(&["cop", "horn"]);
    ensure!(code == 0, "exit {code}: {err}");
    let min = cop::copositive_brute_oracle(&cop::horn(), 24, Exec::Parallel);
    within(start, 30.0, "horn bracket")?;
    let line = out.trim();
    let pass = line == "K0: Infeasible, K1: Feasible" && min >= -1e-9;
    Ok(Outcome::new(pass, format!("{line}; grid minimum {min:e}")))
}

fn random_x(rng: &mut ChaCha8Rng, k: usize) -> RealSymmetric {
    let n = 2 + k % 3;
    let g = DMatrix::<f64>::from_fn(n, n + 1, |_, _| gauss(rng));
    let m = match k % 4 {
        0 => {
            let s = DMatrix::<f64>::from_fn(n, n, |_, _| gauss(rng));
            (&s + s.transpose()) * 0.5 + DMatrix::identity(n, n) * rng.random_range(0.0..2.0)
        }
        1 => &g * g.transpose(),
        2 => {
            let a = g.abs();
            &a * a.transpose()
        }
        _ => (&g * g.transpose()).abs(),
    };
    RealSymmetric::new(m).unwrap()
}

fn bridge_t1() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let mut dnn = 0;
    for k in 0..30 {
        let x = random_x(&mut rng, k);
        let r = cop::dps_cp_bridge_check(&x, 1, &[], &SolveOptions::default())?;
        dnn += usize::from(r.dnn == Some(true));
        if !r.agree {
            bad.push(format!("case {k}: {:?} vs dnn {:?}", r.dps_verdict, r.dnn));
        }
    }
    within(start, 60.0, "bridge checks")?;
    Ok(Outcome::new(bad.is_empty(), format!("30 matrices, {dnn} DNN, disagreements: {bad:?}")))
}

fn horn_search() -> Result<Outcome> {
    let start = Instant::now();
    let r = cop::search_objective(&cop::horn(), 2, &SolveOptions::default())?;
    within(start, 300.0, "search")?;
    Ok(Outcome::new(r.value.abs() <= 1e-5, format!("p* = {:e} ({:?})", r.value, r.status)))
}

// ---------------------------------------------------------------- 9

fn ppt2_experiment() -> Result<Outcome> {
    let start = Instant::now();
    let base = SolveOptions::default();
    let mut means = BTreeMap::new();
    let mut notes = Vec::new();
    let mut bad = Vec::new();
    for (regime, max_t) in [(Regime::Ldoi, 3), (Regime::Cldui, 4), (Regime::Generic, 2)] {
        let cfg = ExperimentConfig { seed: 7, max_t, regime, ..Default::default() };
        let rep = run_experiment(&cfg, &base, Exec::Sequential)?;
        let pairs = rep.rows.iter().filter(|r| r.t == 1).count();
        ensure!(pairs == 45, "{regime}: {pairs} composed states");
        let feasible = rep.rows.iter().filter(|r| r.verdict == Some(Verdict::Feasible)).count();
        if feasible != rep.rows.len() {
            bad.push(format!("{regime}: {feasible}/{} feasible", rep.rows.len()));
        }
        let m = rep.mean_seconds();
        notes.push(format!(
            "{regime} t<={max_t} {feasible}/{} [{}]",
            rep.rows.len(),
            m.iter().map(|(t, s)| format!("t{t} {:.3} ms", s * 1e3)).collect::<Vec<_>>().join(", ")
        ));
        means.insert(regime, m);
    }
    for t in 1..=2 {
        let (g, l, c) = (means[&Regime::Generic][&t], means[&Regime::Ldoi][&t], means[&Regime::Cldui][&t]);
        if !(g > l && l > c) {
            bad.push(format!("t={t}: generic {g:e} ldoi {l:e} cldui {c:e} not ordered"));
        }
    }
    within(start, 1800.0, "PPT² experiment")?;
    notes.extend(bad.iter().cloned());
    Ok(Outcome::new(bad.is_empty(), notes.join("; ")))
}

// ---------------------------------------------------------------- 10

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn projection_idempotent() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(2..=4);
        let rho = random_state(&mut rng, n);
        for regime in Regime::ALL {
            let p = project(&rho, regime)?;
            worst = worst.max(project(&p, regime)?.max_abs_diff(&p));
        }
    }
    Ok(Outcome::new(worst <= 1e-14, format!("40 projections, max deviation {worst:e}")))
}

fn partial_transpose_involution() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let regs = if k % 2 == 0 { vec![2, 3] } else { vec![3, 2, 2] };
        let d: usize = regs.iter().product();
        let g = DMatrix::from_fn(d, d, |_, _| Complex64::new(gauss(&mut rng), gauss(&mut rng)));
        let h = HermitianMatrix::new(&g + g.adjoint(), regs.clone())?;
        for reg in 0..regs.len() {
            let back = h.partial_transpose(&[reg])?.partial_transpose(&[reg])?;
            worst = worst.max(back.max_abs_diff(&h));
        }
    }
    Ok(Outcome::new(worst == 0.0, format!("25 round trips, max deviation {worst:e}")))
}

fn random_triple(rng: &mut ChaCha8Rng, n: usize) -> TripleXYZ {
    let x = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut herm = || {
        DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Equal => Complex64::new(x[(i, i)], 0.0),
            _ => Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        })
    };
    let (y, z) = (herm(), herm());
    let sym = |m: DMatrix<Complex64>| (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    TripleXYZ::new(x.clone(), sym(y), sym(z)).unwrap()
}

fn composition_choi() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = 1 + k % 4;
        let (t1, t2) = (random_triple(&mut rng, n), random_triple(&mut rng, n));
        let composed = rho_from_triple(&compose(&t1, &t2)?);
        let choi = choi_matrix(n, |m| apply_choi_map(&t1, &apply_choi_map(&t2, m)))?;
        worst = worst.max(composed.max_abs_diff(&choi));
    }
    Ok(Outcome::new(worst <= 1e-9, format!("20 pairs, max deviation {worst:e}")))
}

/// Largest raw LDOI tensor clique against `t! n^ceil(t/2)`, n <= 5, t <= 4.
/// Returns the outcome and whether the failures are exactly the known
/// `t = 2` counterexamples of size `3n - 2`.
fn clique_bound() -> Result<(Outcome, bool)> {
    let mut violations = Vec::new();
    let mut only_known = true;
    for n in 1usize..=5 {
        for t in 1..=4 {
            let bound = factorial(t) * (n as f64).powi(t.div_ceil(2) as i32);
            for s in 0..=t {
                let layout = tensor_block_layout(n, t, s, Regime::Ldoi)?;
                let largest = layout.cliques.iter().map(|c| c.members.len()).max().unwrap_or(0);
                if largest as f64 > bound {
                    violations.push(format!("(n={n},t={t},s={s}) {largest} > {bound}"));
                    only_known &= t == 2 && largest == 3 * n - 2;
                }
            }
        }
    }
    let pass = violations.is_empty();
    let detail = if pass {
        "all cliques within bound".to_string()
    } else {
        format!("{} violations: {}", violations.len(), violations.join(", "))
    };
    Ok((Outcome::new(pass, detail), !pass && only_known))
}

fn moment_ratio_bound() -> Result<Outcome> {
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 1..=5 {
        for t in 1..=5 {
            for layout in moment_block_layout(n, t, Regime::Ldoi) {
                let total = layout.basis_len() as f64;
                let largest = *layout.sizes().iter().max().unwrap() as f64;
                let e = (t as i64 + layout.s_prime.abs()) as usize;
                let bound = factorial(e / 2) / (n as f64).powi(e.div_ceil(4) as i32);
                checked += 1;
                if largest / total > bound + 1e-12 {
                    bad.push(format!("(n={n},t={t},s'={})", layout.s_prime));
                }
            }
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{checked} layouts, violations: {bad:?}")))
}

fn separable(rng: &mut ChaCha8Rng, n: usize, r: usize) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(n * n, vec![n, n]).unwrap();
    for _ in 0..r {
        let x = DMatrix::from_fn(n, 1, |_, _| Complex64::new(gauss(rng), gauss(rng)));
        let y = DMatrix::from_fn(n, 1, |_, _| Complex64::new(gauss(rng), gauss(rng)));
        let xy: Vec<Complex64> = x.kronecker(&y).iter().copied().collect();
        acc = acc.add(&HermitianMatrix::outer(&xy, vec![n, n]).unwrap());
    }
    acc
}

fn kernel_propagation() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut bad = Vec::new();
    let mut kernels = 0;
    for k in 0..6 {
        let r = rng.random_range(2..=5);
        let rho = separable(&mut rng, 3, r);
        let model = build_dps_moment(&rho, 2, Regime::Generic)?;
        let rep = solve_model(&model, &ModelOptions::default(), &SolveOptions::default())?;
        let cert = verify_certificate(&rho, &model, &rep.values);
        kernels += cert.kernel_vectors;
        if rep.verdict == Verdict::Infeasible || cert.kernel_vectors == 0 || !cert.passed() {
            bad.push(format!("case {k}: {:?} {:?}", rep.verdict, cert.violations));
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("6 certificates, {kernels} kernel vectors checked {bad:?}")))
}

fn properties() -> Result<(Outcome, bool)> {
    let mut failed = Vec::new();
    let known = std::cell::Cell::new(false);
    let mut run = |id: &str, name: &str, f: &dyn Fn() -> Result<Outcome>| {
        if !report(id, name, Instant::now(), f()) {
            failed.push(id.to_string());
        }
    };
    run("10a", "projection idempotency", &projection_idempotent);
    run("10b", "partial-transpose involution", &partial_transpose_involution);
    run("10c", "composition Choi consistency", &composition_choi);
    run("10d", "tensor clique-size bound", &|| {
        clique_bound().map(|(o, k)| {
            known.set(k);
            o
        })
    });
    run("10e", "LDOI moment block ratio bound", &moment_ratio_bound);
    run("10f", "kernel propagation on certificates", &kernel_propagation);
    let pass = failed.is_empty();
    let only_known = failed == ["10d"] && known.get();
    let detail = if pass {
        "all sub-checks pass".to_string()
    } else if only_known {
        "10d fails: the bound is false at t = 2, cliques reach 3n - 2 members".to_string()
    } else {
        format!("failed sub-checks: {failed:?}")
    };
    Ok((Outcome::new(pass, detail), only_known))
}

type Criterion = (&'static str, &'static str, fn() -> Result<Outcome>);

fn main() {
    // `cargo test -- --list` and filters from the harness are not supported.
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 9] = [
        ("1", "block-size golden tables", block_tables),
        ("2", "tensor clique goldens", tensor_cliques),
        ("3", "rho_{a,a'} classification grid", rho_aap_grid),
        ("4", "rho(a,b) classification", rho_ab_grid),
        ("5", "moment/tensor formalism equivalence", formalism_equivalence),
        ("6", "Horn matrix bracket", horn_bracket),
        ("7", "bridge at t = 1", bridge_t1),
        ("8", "counterexample search on Horn", horn_search),
        ("9", "PPT² experiment", ppt2_experiment),
    ];
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        if !report(id, name, Instant::now(), f()) {
            unexpected.push(id);
        }
    }
    let start = Instant::now();
    let mut known = false;
    let props = properties().map(|(o, k)| {
        known = k;
        o
    });
    if !report("10", "property suites", start, props) && !known {
        unexpected.push("10");
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
    if known {
        println!("criteria 1-9 pass; criterion 10 fails only on the known clique-size counterexample");
    } else {
        println!("all criteria pass");
    }
}
