//! Block-diagonal linear matrix inequalities.
//!
//! A problem has `m` free variables `y` and blocks
//! `B_k(y) = F_{k,0} + sum_i y_i F_{k,i}`. [`solve_feasibility`] computes the
//! margin `lambda* = min { lambda : B_k(y) + lambda W_k ⪰ 0 for all k, lambda ≥ -cap }`
//! where each `W_k` is the identity unless the block carries diagonal margin
//! weights. [`solve_objective`] minimizes `c^T y` over `B_k(y) ⪰ 0`.
//!
//! Both modes run the same infeasible-start primal-dual interior-point method
//! (Nesterov-Todd scaling, Mehrotra predictor-corrector) on the SDPA dual form.

mod ipm;
mod sdpa;

use std::collections::BTreeMap;

use hermitian_core::par::Exec;
use serde::Serialize;

pub use ipm::{assemble_schur, certified_margin, solve_feasibility, solve_objective};
pub use sdpa::{export_sdpa, format_value, import_sdpa, read_sdpa, write_sdpa};

/// Symmetric block of an LMI. Coefficient matrices are stored by their upper
/// triangle: `mats[0]` is `F_0`, `mats[i + 1]` is `F_{i}` (missing means zero).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LmiBlock {
    pub dim: usize,
    pub mats: BTreeMap<usize, BTreeMap<(usize, usize), f64>>,
    /// Upper triangle of the positive definite margin matrix `W_k`; `None`
    /// means the identity.
    pub margin: Option<BTreeMap<(usize, usize), f64>>,
}

impl LmiBlock {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "blocks must have positive dimension");
        Self { dim, mats: BTreeMap::new(), margin: None }
    }

    fn add(&mut self, matno: usize, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim, "entry outside block");
        if v == 0.0 {
            return;
        }
        let key = if i <= j { (i, j) } else { (j, i) };
        let slot = self.mats.entry(matno).or_default().entry(key).or_insert(0.0);
        *slot += v;
    }

    /// Adds `v` to the constant term at `(i, j)` and, off the diagonal, `(j, i)`.
    pub fn add_constant(&mut self, i: usize, j: usize, v: f64) {
        self.add(0, i, j, v);
    }

    /// Adds `v y_var` at `(i, j)` and, off the diagonal, `(j, i)`.
    pub fn add_term(&mut self, var: usize, i: usize, j: usize, v: f64) {
        self.add(var + 1, i, j, v);
    }

    /// Diagonal margin matrix.
    pub fn with_margin_weights(mut self, w: Vec<f64>) -> Self {
        assert_eq!(w.len(), self.dim);
        assert!(w.iter().all(|&x| x > 0.0), "margin weights must be positive");
        self.margin = Some(w.into_iter().enumerate().map(|(i, v)| ((i, i), v)).collect());
        self
    }

    /// General margin matrix; only the upper triangle of `w` is read.
    pub fn with_margin_matrix(mut self, w: &nalgebra::DMatrix<f64>) -> Self {
        assert_eq!(w.shape(), (self.dim, self.dim));
        let mut m = BTreeMap::new();
        for i in 0..self.dim {
            for j in i..self.dim {
                if w[(i, j)] != 0.0 {
                    m.insert((i, j), w[(i, j)]);
                }
            }
        }
        self.margin = Some(m);
        self
    }

    /// Dense margin matrix `W`.
    pub fn margin_matrix(&self) -> nalgebra::DMatrix<f64> {
        match &self.margin {
            None => nalgebra::DMatrix::identity(self.dim, self.dim),
            Some(m) => {
                let mut out = nalgebra::DMatrix::zeros(self.dim, self.dim);
                for (&(i, j), &v) in m {
                    out[(i, j)] = v;
                    out[(j, i)] = v;
                }
                out
            }
        }
    }

    /// Drops exact zeros left behind by cancellation.
    pub fn prune(&mut self) {
        for m in self.mats.values_mut() {
            m.retain(|_, v| *v != 0.0);
        }
        self.mats.retain(|_, m| !m.is_empty());
    }

    /// Dense evaluation of `B(y)`.
    pub fn evaluate(&self, y: &[f64]) -> nalgebra::DMatrix<f64> {
        let mut out = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (&matno, m) in &self.mats {
            let coef = if matno == 0 { 1.0 } else { y[matno - 1] };
            if coef == 0.0 {
                continue;
            }
            for (&(i, j), &v) in m {
                out[(i, j)] += coef * v;
                if i != j {
                    out[(j, i)] += coef * v;
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct LmiProblem {
    pub num_vars: usize,
    pub blocks: Vec<LmiBlock>,
}

impl LmiProblem {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, blocks: Vec::new() }
    }

    pub fn push(&mut self, block: LmiBlock) -> usize {
        self.blocks.push(block);
        self.blocks.len() - 1
    }

    /// Applies `Q^T B Q` to every matrix of every block, with `qs[k]` orthogonal.
    pub fn conjugated(&self, qs: &[nalgebra::DMatrix<f64>]) -> Self {
        let mut out = LmiProblem::new(self.num_vars);
        for (b, q) in self.blocks.iter().zip(qs) {
            let mut nb = LmiBlock::new(b.dim);
            if b.margin.is_some() {
                let w = q.transpose() * b.margin_matrix() * q;
                nb = nb.with_margin_matrix(&((&w + w.transpose()) * 0.5));
            }
            for (&matno, m) in &b.mats {
                let mut dense = nalgebra::DMatrix::zeros(b.dim, b.dim);
                for (&(i, j), &v) in m {
                    dense[(i, j)] = v;
                    dense[(j, i)] = v;
                }
                let c = q.transpose() * dense * q;
                for i in 0..b.dim {
                    for j in i..b.dim {
                        nb.add(matno, i, j, 0.5 * (c[(i, j)] + c[(j, i)]));
                    }
                }
            }
            out.push(nb);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Feasible,
    Infeasible,
    Marginal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    /// Stopped early with a certificate good enough to decide the verdict.
    Certified,
    IterationLimit,
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub verdict: Verdict,
    /// Margin attained by the returned `y`: the smallest `lambda` making every
    /// weighted block PSD at that point.
    pub margin: f64,
    /// Lower bound from the dual side (primal SDPA objective).
    pub margin_lower: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub block_min_eigs: Vec<f64>,
    pub status: Status,
    pub y: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ObjectiveStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObjectiveReport {
    pub status: ObjectiveStatus,
    pub value: f64,
    pub lower_bound: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub y: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol_feas: f64,
    pub max_iter: usize,
    pub gap_tol: f64,
    /// The margin is bounded below by `-lambda_cap`.
    pub lambda_cap: f64,
    pub verbosity: u8,
    pub exec: Exec,
    /// Magnitude of `y` beyond which objective mode reports unboundedness.
    pub unbounded_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-7,
            max_iter: 200,
            gap_tol: 1e-8,
            lambda_cap: 1.0,
            verbosity: 0,
            exec: Exec::Parallel,
            unbounded_threshold: 1e9,
        }
    }
}

impl SolveOptions {
    /// Defaults with `tol_feas` taken from `DPSKIT_TOL` when set and valid.
    pub fn from_env() -> Self {
        let mut o = Self::default();
        if let Some(t) = std::env::var("DPSKIT_TOL").ok().and_then(|s| s.parse::<f64>().ok()) {
            if t > 0.0 {
                o.tol_feas = t;
            }
        }
        o
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("solver failed to converge after {} iterations (best margin {:e})", .0.iterations, .0.margin)]
    NumericalFailure(Box<SolveReport>),
    #[error("objective solve failed after {} iterations", .0.iterations)]
    ObjectiveFailure(Box<ObjectiveReport>),
    #[error("objective has length {got}, expected {want}")]
    ObjectiveLength { got: usize, want: usize },
    #[error("non-finite problem data")]
    NonFinite,
}

#[derive(Debug, thiserror::Error)]
pub enum SdpaError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn verdict_for(margin: f64, tol: f64) -> Verdict {
    if margin <= -tol {
        Verdict::Feasible
    } else if margin >= tol {
        Verdict::Infeasible
    } else {
        Verdict::Marginal
    }
}
