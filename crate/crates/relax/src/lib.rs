//! DPS and Bose-symmetric DPS membership problems as block-diagonal LMIs.
//!
//! [`build_dps_moment`] and [`build_dps_bose`] assemble the moment form of a
//! level-`t` certificate; [`build_dps_tensor`] and [`build_bose_tensor`] build
//! the same problems directly on tensor indices and serve as oracles. Every
//! builder returns a [`DpsModel`]; [`solve_model`] lowers it to an
//! [`sdp::LmiProblem`], solves the margin problem, and maps the solution
//! back to model variables. [`verify_certificate`] checks a solution against
//! the defining conditions on the reconstructed extension.

mod bose;
mod kernel;
mod model;
mod moment;
mod tensor;
mod verify;

use std::time::Instant;

use hermitian_core::{Complex64, HermitianMatrix};
use patterns::Regime;
use sdp::{SolveError, SolveOptions, Status, Verdict};
use serde::Serialize;

pub use bose::{build_dps_bose, build_dps_bose_with};
pub use model::{
    compile, lower, Compiled, DpsModel, Equality, Formalism, HermBlock, Hierarchy, Lowered, ModelOptions, Term,
    VarInfo, VarKey,
};
pub use moment::{build_dps_moment, build_dps_moment_linear, build_dps_moment_with, LinearRho};
pub use tensor::{build_bose_tensor, build_bose_tensor_with, build_dps_tensor, build_dps_tensor_with};
pub use verify::{reconstruct, verify_certificate, verify_tensor_certificate, CertificateReport};

#[derive(Debug, thiserror::Error)]
pub enum RelaxError {
    #[error(transparent)]
    State(#[from] states::StateError),
    #[error("state has non-finite trace {0:e}")]
    Trace(f64),
    #[error("state has support outside the {regime} pattern (entry of modulus {value:e})")]
    Support { regime: Regime, value: f64 },
    #[error("state is not Bose symmetric (deviation {0:e})")]
    NotBose(f64),
    #[error("level t must be at least 1")]
    Level,
    #[error("regime {0} is not available for the Bose-symmetric hierarchy")]
    BoseRegime(Regime),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Outcome of a membership query.
#[derive(Clone, Debug, Serialize)]
pub struct MembershipReport {
    pub verdict: Verdict,
    pub margin: f64,
    pub margin_lower: f64,
    pub status: Status,
    pub iterations: usize,
    /// Free real variables of the LMI after elimination.
    pub lmi_vars: usize,
    pub lmi_block_sizes: Vec<usize>,
    pub model_block_sizes: Vec<usize>,
    pub seconds: f64,
    /// Largest residual of an inconsistent equality system, if any.
    pub inconsistent: Option<f64>,
    /// Model variable values (for the trace-normalized state).
    #[serde(skip)]
    pub values: Vec<Complex64>,
}

/// Lowers, solves, and maps the solution back.
pub fn solve_model(
    model: &DpsModel,
    mopts: &ModelOptions,
    sopts: &SolveOptions,
) -> Result<MembershipReport, RelaxError> {
    let start = Instant::now();
    let compiled = compile(&lower(model, mopts));
    let lmi_block_sizes: Vec<usize> = compiled.problem.blocks.iter().map(|b| b.dim).collect();
    let base = |verdict, margin, status, iterations, values| MembershipReport {
        verdict,
        margin,
        margin_lower: margin,
        status,
        iterations,
        lmi_vars: compiled.problem.num_vars,
        lmi_block_sizes: lmi_block_sizes.clone(),
        model_block_sizes: model.block_sizes(),
        seconds: start.elapsed().as_secs_f64(),
        inconsistent: compiled.inconsistent,
        values,
    };
    if let Some(r) = compiled.inconsistent {
        // No certificate satisfies the linear constraints.
        return Ok(base(Verdict::Infeasible, r, Status::Certified, 0, Vec::new()));
    }
    if compiled.problem.blocks.is_empty() {
        let y = vec![0.0; compiled.problem.num_vars];
        return Ok(base(Verdict::Feasible, -sopts.lambda_cap, Status::Certified, 0, compiled.values(&y)));
    }
    let r = sdp::solve_feasibility(&compiled.problem, sopts)?;
    let mut out = base(r.verdict, r.margin, r.status, r.iterations, compiled.values(&r.y));
    out.margin_lower = r.margin_lower;
    out.seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Builds the model for the requested hierarchy and formalism and solves it.
///
/// The Bose-symmetric hierarchy accepts `Generic` and `Ldui` (the latter
/// switches on the LDUI filter).
pub fn check_membership(
    rho: &HermitianMatrix,
    t: usize,
    regime: Regime,
    hierarchy: Hierarchy,
    formalism: Formalism,
    mopts: &ModelOptions,
    sopts: &SolveOptions,
) -> Result<MembershipReport, RelaxError> {
    let model = build(rho, t, regime, hierarchy, formalism, mopts)?;
    solve_model(&model, mopts, sopts)
}

pub fn build(
    rho: &HermitianMatrix,
    t: usize,
    regime: Regime,
    hierarchy: Hierarchy,
    formalism: Formalism,
    mopts: &ModelOptions,
) -> Result<DpsModel, RelaxError> {
    match hierarchy {
        Hierarchy::Dps => match formalism {
            Formalism::Moment => build_dps_moment_with(rho, t, regime, mopts),
            Formalism::Tensor => build_dps_tensor_with(rho, t, regime, mopts),
        },
        Hierarchy::Bose => {
            let ldui = match regime {
                Regime::Generic => false,
                Regime::Ldui => true,
                other => return Err(RelaxError::BoseRegime(other)),
            };
            match formalism {
                Formalism::Moment => build_dps_bose_with(rho, t, ldui, mopts),
                Formalism::Tensor => build_bose_tensor_with(rho, t, ldui, mopts),
            }
        }
    }
}
