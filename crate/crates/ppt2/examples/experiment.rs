//! Runs the default experiment in one regime and prints a per-level summary.
//!
//! Usage: `cargo run --release -p ppt2 --example experiment -- [regime] [max_t] [seed]`
//! Set `SEQUENTIAL=1` to run rows one at a time.

use std::collections::BTreeMap;

use hermitian_core::par::Exec;
use ppt2::{run_experiment, ExperimentConfig};
use sdp::SolveOptions;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig::default();
    if let Some(r) = args.first() {
        cfg.regime = r.parse().expect("regime");
    }
    if let Some(t) = args.get(1) {
        cfg.max_t = t.parse().expect("max_t");
    }
    if let Some(s) = args.get(2) {
        cfg.seed = s.parse().expect("seed");
    }
    let exec = if std::env::var_os("SEQUENTIAL").is_some() { Exec::Sequential } else { Exec::Parallel };
    let rep = run_experiment(&cfg, &SolveOptions::default(), exec).expect("experiment");
    println!("factors {} (marginal {}), resamples {}", rep.factors, rep.marginal_factors, rep.resamples);
    let mut tally: BTreeMap<(usize, String), usize> = BTreeMap::new();
    for r in &rep.rows {
        let v = r.verdict.map_or("Error".to_string(), |v| format!("{v:?}"));
        *tally.entry((r.t, v)).or_default() += 1;
        if let Some(e) = &r.error {
            println!("a={} i={} j={} t={}: {e}", r.a, r.i, r.j, r.t);
        }
    }
    for ((t, v), k) in tally {
        println!("t={t} {v}: {k}");
    }
    for (t, s) in rep.mean_seconds() {
        println!("t={t} mean {s:.4} s");
    }
}
