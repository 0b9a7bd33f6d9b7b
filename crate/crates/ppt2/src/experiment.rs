//! Test-state generation and the batch DPS experiment on composed maps.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use hermitian_core::par::{self, Exec};
use hermitian_core::{psd_accepts, HermitianMatrix, PSD_TOL};
use nalgebra::DMatrix;
use patterns::Regime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use relax::{check_membership, Formalism, Hierarchy, ModelOptions};
use sdp::{SolveOptions, Verdict};
use serde::{Deserialize, Serialize};
use states::{project, rho_from_triple, trace_normalized, TripleXYZ};

use crate::maps::compose;
use crate::Ppt2Error;

/// Draws allowed per factor before giving up.
const MAX_DRAWS: usize = 1000;

pub const CSV_HEADER: [&str; 8] = ["a", "i", "j", "t", "regime", "verdict", "margin", "seconds"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Each `a` gives the factor family `X_a` with `a' = 1/a`.
    pub a_values: Vec<f64>,
    /// Random `Z` matrices per `a`.
    pub num_z: usize,
    pub seed: u64,
    /// Levels `1..=max_t` are solved.
    pub max_t: usize,
    pub regime: Regime,
    pub tol_feas: Option<f64>,
    pub max_iter: Option<usize>,
    pub kernel_tol: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            a_values: vec![2.0, 3.0, 4.0],
            num_z: 5,
            seed: 0,
            max_t: 3,
            regime: Regime::Ldoi,
            tol_feas: None,
            max_iter: None,
            kernel_tol: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self, Ppt2Error> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Ppt2Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Ppt2Error> {
        if self.regime == Regime::Ldui {
            return Err(Ppt2Error::Regime(self.regime));
        }
        if let Some(a) = self.a_values.iter().find(|a| !(**a > 1.0) || !a.is_finite()) {
            return Err(Ppt2Error::Config(format!("a-values must be finite and > 1, got {a}")));
        }
        Ok(())
    }

    /// `base` with the configured overrides applied.
    pub fn solve_options(&self, base: &SolveOptions) -> SolveOptions {
        let mut o = base.clone();
        if let Some(t) = self.tol_feas {
            o.tol_feas = t;
        }
        if let Some(m) = self.max_iter {
            o.max_iter = m;
        }
        o
    }

    pub fn model_options(&self) -> ModelOptions {
        let mut o = ModelOptions::default();
        if let Some(k) = self.kernel_tol {
            o.kernel_tol = k;
        }
        o
    }
}

/// `X_a`: the 3x3 pattern `[[1, a, 1/a], [1/a, 1, a], [a, 1/a, 1]]` bordered by ones.
pub fn x_a(a: f64) -> DMatrix<f64> {
    let b = 1.0 / a;
    #[rustfmt::skip]
    let x = DMatrix::from_row_slice(4, 4, &[
        1.0, a,   b,   1.0,
        b,   1.0, a,   1.0,
        a,   b,   1.0, 1.0,
        1.0, 1.0, 1.0, 1.0,
    ]);
    x
}

#[derive(Clone, Debug)]
pub struct Factor {
    pub a: f64,
    /// Position of `a` in the config.
    pub a_index: usize,
    /// Index of `Z` within its `a`.
    pub index: usize,
    pub triple: TripleXYZ,
    /// PPT test of the factor: `Marginal` when `rho` or `rho^{T_B}` is singular.
    pub check: Verdict,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug)]
pub struct TestStates {
    pub factors: Vec<Factor>,
    /// Draws of `Z` rejected because the factor was not PPT.
    pub resamples: usize,
}

impl TestStates {
    /// Composed pairs `(i <= j)` sharing the same `a`, in row order.
    pub fn pairs(&self) -> Result<Vec<Pair>, Ppt2Error> {
        let mut out = Vec::new();
        for f in &self.factors {
            for g in self.factors.iter().filter(|g| g.a_index == f.a_index && g.index >= f.index) {
                out.push(Pair { a: f.a, i: f.index, j: g.index, triple: compose(&f.triple, &g.triple)? });
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Pair {
    pub a: f64,
    pub i: usize,
    pub j: usize,
    pub triple: TripleXYZ,
}

/// Gram matrix of `n` independent uniform unit vectors in `R^n`.
fn random_gram(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut v = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    for mut c in v.column_iter_mut() {
        let norm = c.norm();
        c /= norm;
    }
    let mut g = v.transpose() * &v;
    g.fill_diagonal(1.0);
    g
}

/// PPT test on eigenvalues, with the repo-wide slack.
pub fn ppt_check(rho: &HermitianMatrix) -> Result<(Verdict, f64), Ppt2Error> {
    let tb = rho.partial_transpose(&[1])?;
    let lam = rho.min_eigenvalue().min(tb.min_eigenvalue());
    let fro = rho.frobenius_norm();
    let verdict = if !psd_accepts(lam, fro) {
        Verdict::Infeasible
    } else if lam <= PSD_TOL * (1.0 + fro) {
        Verdict::Marginal
    } else {
        Verdict::Feasible
    };
    Ok((verdict, lam))
}

/// Factors `(X_a, J_4, Z)` for every configured `a` and `num_z` random `Z`.
///
/// Each `a` draws from its own stream of the seeded generator, so adding an
/// `a`-value leaves the other factors unchanged. A draw is rejected only when
/// the factor fails the PPT test outright.
pub fn gen_test_states(cfg: &ExperimentConfig) -> Result<TestStates, Ppt2Error> {
    cfg.validate()?;
    let n = 4;
    let y = DMatrix::from_element(n, n, 1.0);
    let mut factors = Vec::new();
    let mut resamples = 0;
    for (k, &a) in cfg.a_values.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        for index in 0..cfg.num_z {
            let mut draws = 0;
            loop {
                draws += 1;
                let triple = TripleXYZ::from_real(x_a(a), y.clone(), random_gram(&mut rng, n))?;
                let (check, min_eigenvalue) = ppt_check(&rho_from_triple(&triple))?;
                if check != Verdict::Infeasible {
                    factors.push(Factor { a, a_index: k, index, triple, check, min_eigenvalue });
                    break;
                }
                if draws == MAX_DRAWS {
                    return Err(Ppt2Error::Sampling { a, index });
                }
                resamples += 1;
            }
        }
    }
    Ok(TestStates { factors, resamples })
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub a: f64,
    pub i: usize,
    pub j: usize,
    pub t: usize,
    pub regime: Regime,
    /// `None` when the solve failed.
    pub verdict: Option<Verdict>,
    pub margin: f64,
    pub seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub factors: usize,
    pub marginal_factors: usize,
    pub resamples: usize,
    pub rows: Vec<Row>,
}

impl ExperimentReport {
    /// Mean solve time per level.
    pub fn mean_seconds(&self) -> BTreeMap<usize, f64> {
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for r in &self.rows {
            let e = acc.entry(r.t).or_default();
            e.0 += r.seconds;
            e.1 += 1;
        }
        acc.into_iter().map(|(t, (s, k))| (t, s / k as f64)).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Ppt2Error> {
        write_csv(&self.rows, w)
    }
}

/// Writes rows; numbers use the shortest text that parses back exactly.
pub fn write_csv<W: Write>(rows: &[Row], w: W) -> Result<(), Ppt2Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        let verdict = r.verdict.map_or("Error".to_string(), |v| format!("{v:?}"));
        out.write_record([
            format!("{:?}", r.a),
            r.i.to_string(),
            r.j.to_string(),
            r.t.to_string(),
            r.regime.to_string(),
            verdict,
            format!("{:?}", r.margin),
            format!("{:?}", r.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The composed state prepared for a regime: trace-normalized, and projected
/// in the CLDUI regime.
pub fn prepare(triple: &TripleXYZ, regime: Regime) -> Result<HermitianMatrix, Ppt2Error> {
    let (rho, _) = trace_normalized(&rho_from_triple(triple));
    Ok(match regime {
        Regime::Cldui => project(&rho, Regime::Cldui)?,
        _ => rho,
    })
}

/// Solves DPS^(t) for every composed pair and `t = 1..=max_t`.
///
/// Rows are independent and run through `exec`; the output order is the row
/// key `(a, i, j, t)` regardless of completion order. A failed solve is
/// recorded in its row and the run continues.
pub fn run_experiment(cfg: &ExperimentConfig, base: &SolveOptions, exec: Exec) -> Result<ExperimentReport, Ppt2Error> {
    let states = gen_test_states(cfg)?;
    let pairs = states.pairs()?;
    let sopts = SolveOptions { exec, ..cfg.solve_options(base) };
    let mopts = cfg.model_options();
    let tasks: Vec<(usize, usize)> = (0..pairs.len()).flat_map(|p| (1..=cfg.max_t).map(move |t| (p, t))).collect();
    let rows = par::map(exec, &tasks, |&(p, t)| {
        let pair = &pairs[p];
        let mut seconds = 0.0;
        let outcome = prepare(&pair.triple, cfg.regime).and_then(|rho| {
            // Model assembly and solve; preparing the state is not timed.
            let start = Instant::now();
            let r = check_membership(&rho, t, cfg.regime, Hierarchy::Dps, Formalism::Moment, &mopts, &sopts);
            seconds = start.elapsed().as_secs_f64();
            Ok(r?)
        });
        let (verdict, margin, error) = match outcome {
            Ok(r) => (Some(r.verdict), r.margin, None),
            Err(e) => (None, f64::NAN, Some(e.to_string())),
        };
        Row { a: pair.a, i: pair.i, j: pair.j, t, regime: cfg.regime, verdict, margin, seconds, error }
    });
    Ok(ExperimentReport {
        factors: states.factors.len(),
        marginal_factors: states.factors.iter().filter(|f| f.check == Verdict::Marginal).count(),
        resamples: states.resamples,
        rows,
    })
}
