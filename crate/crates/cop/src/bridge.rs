//! Links between `K^(t)` and the Bose-symmetric DPS hierarchy on the LDUI
//! states `rho_(X,X)^{T_B}`.

use std::collections::BTreeMap;
use std::time::Instant;

use hermitian_core::{psd_accepts, Complex64, HermitianMatrix, RealSymmetric};
use nalgebra::DMatrix;
use patterns::Regime;
use relax::{build_dps_bose, build_dps_moment_linear, compile, lower, solve_model, LinearRho, ModelOptions, VarKey};
use sdp::{
    solve_feasibility, solve_objective, LmiBlock, ObjectiveReport, ObjectiveStatus, SolveError, SolveOptions, Verdict,
};
use serde::Serialize;
use states::{rho_from_triple, TripleXYZ};

use crate::cones::kt_membership;
use crate::CopError;

/// `rho_(X,X)^{T_B}`: `X` on `(ij, ij)` and on `(ij, ji)`, nothing on
/// `(ii, jj)` off the diagonal.
pub fn rho_xx_tb(x: &RealSymmetric) -> Result<HermitianMatrix, CopError> {
    let m = x.matrix().clone();
    let d = DMatrix::from_diagonal(&m.diagonal());
    Ok(rho_from_triple(&TripleXYZ::from_real(m.clone(), d, m)?))
}

/// Doubly nonnegative: PSD and entrywise nonnegative.
pub fn is_doubly_nonnegative(x: &RealSymmetric) -> bool {
    let scale = x.matrix().amax().max(1e-300);
    psd_accepts(x.min_eigenvalue(), x.frobenius_norm()) && x.matrix().iter().all(|&v| v >= -1e-12 * scale)
}

/// One supplied witness `C` in a level `t >= 2` check.
#[derive(Clone, Debug, Serialize)]
pub struct WitnessCheck {
    /// Verdict of `C ∈ K^(t-1)`.
    pub in_cone: Verdict,
    /// `<C, X>`.
    pub pairing: f64,
    /// False when `C` certifies `X ∉ (K^(t-1))^*` but DPS̃ accepted.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeReport {
    pub t: usize,
    pub dps_verdict: Verdict,
    pub dps_margin: f64,
    /// The doubly-nonnegative test; set at `t = 1` only.
    pub dnn: Option<bool>,
    pub witnesses: Vec<WitnessCheck>,
    /// At `t = 1`: DPS̃ feasibility equals the DNN test. Otherwise: every
    /// witness is consistent.
    pub agree: bool,
}

/// Compares DPS̃ feasibility of `rho_(X,X)^{T_B}` with the dual-cone side:
/// the DNN test at `t = 1`, the supplied witnesses at `t >= 2`.
pub fn dps_cp_bridge_check(
    x: &RealSymmetric,
    t: usize,
    witnesses: &[RealSymmetric],
    opts: &SolveOptions,
) -> Result<BridgeReport, CopError> {
    if t == 0 {
        return Err(CopError::Level);
    }
    let rho = rho_xx_tb(x)?;
    let mopts = ModelOptions::default();
    let model = build_dps_bose(&rho, t, true)?;
    let rep = solve_model(&model, &mopts, opts)?;
    let mut out = BridgeReport {
        t,
        dps_verdict: rep.verdict,
        dps_margin: rep.margin,
        dnn: None,
        witnesses: Vec::new(),
        agree: true,
    };
    if t == 1 {
        let dnn = is_doubly_nonnegative(x);
        out.dnn = Some(dnn);
        out.agree = (rep.verdict == Verdict::Feasible) == dnn && rep.verdict != Verdict::Marginal;
    }
    for c in witnesses {
        if c.dim() != x.dim() {
            return Err(CopError::Dimension { want: x.dim(), got: c.dim() });
        }
        let in_cone = kt_membership(c, t - 1, opts)?.verdict;
        let pairing = c.matrix().dot(x.matrix());
        let separates = in_cone == Verdict::Feasible && pairing < -opts.tol_feas;
        let consistent = !(separates && rep.verdict == Verdict::Feasible);
        out.agree &= consistent;
        out.witnesses.push(WitnessCheck { in_cone, pairing, consistent });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub status: ObjectiveStatus,
    /// Optimal `<C, X>`; `-inf` when unbounded, `+inf` when infeasible.
    pub value: f64,
    /// Optimum of the problem restricted to `tr X <= 1`.
    pub bounded_value: f64,
    /// Minimizer of the bounded problem, when one was found.
    pub x: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    pub seconds: f64,
}

/// `min <C, X>` over symmetric `X` with `rho_(X,X)^{T_B} ∈ DPS^(t)`, solved on
/// the LDUI-reduced moment model.
pub fn search_objective(c: &RealSymmetric, t: usize, opts: &SolveOptions) -> Result<SearchReport, CopError> {
    if t == 0 {
        return Err(CopError::Level);
    }
    let start = Instant::now();
    let n = c.dim();
    let mut param = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            let k = param.len();
            param.insert((i, j), k);
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let mut entries: BTreeMap<(usize, usize), Vec<(usize, Complex64)>> = BTreeMap::new();
    for (&(i, j), &p) in &param {
        let a = i * n + j;
        entries.entry((a, a)).or_default().push((p, one));
        if i != j {
            let b = j * n + i;
            entries.entry((b, b)).or_default().push((p, one));
            entries.entry((a, b)).or_default().push((p, one));
        }
    }
    let lr = LinearRho { n, params: param.len(), entries };
    let mopts = ModelOptions::default();
    let model = build_dps_moment_linear(&lr, t, Regime::Ldui, &mopts)?;
    let compiled = compile(&lower(&model, &mopts));
    let done = |status, value, x, iterations| SearchReport {
        status,
        value,
        bounded_value: value,
        x,
        iterations,
        seconds: start.elapsed().as_secs_f64(),
    };
    if compiled.inconsistent.is_some() {
        return Ok(done(ObjectiveStatus::Infeasible, f64::INFINITY, None, 0));
    }
    // <C, X> and tr X over the real unknowns holding the parameters.
    let unknown = |p: usize| 2 * model.index[&VarKey::Param(p)];
    let mut cost = BTreeMap::new();
    let mut trace = BTreeMap::new();
    for (&(i, j), &p) in &param {
        let w = if i == j { c.get(i, i) } else { 2.0 * c.get(i, j) };
        if w != 0.0 {
            cost.insert(unknown(p), w);
        }
        if i == j {
            trace.insert(unknown(p), 1.0);
        }
    }
    let (Some((c0, g)), Some((t0, tg))) = (compiled.objective(&cost), compiled.objective(&trace)) else {
        // A parameter no block constrains can be moved freely.
        return Ok(done(ObjectiveStatus::Unbounded, f64::NEG_INFINITY, None, 0));
    };
    // The feasible set is a cone, so the value is 0 or -inf. Bounding
    // tr X <= 1 makes the problem compact; a negative bounded value
    // scales to -inf.
    let mut problem = compiled.problem.clone();
    let mut cap = LmiBlock::new(1);
    cap.add_constant(0, 0, 1.0 - t0);
    for (k, &v) in tg.iter().enumerate() {
        cap.add_term(k, 0, 0, -v);
    }
    problem.push(cap);
    // The margin solve first: an empty feasible set has nothing to optimize.
    let feas = solve_feasibility(&problem, opts)?;
    if feas.verdict == Verdict::Infeasible {
        return Ok(done(ObjectiveStatus::Infeasible, f64::INFINITY, None, feas.iterations));
    }
    let r = match solve_objective(&problem, &g, opts) {
        Ok(r) => r,
        // Stalled just short of the convergence tolerance.
        Err(SolveError::ObjectiveFailure(r)) if accurate_enough(&r) => *r,
        Err(e) => return Err(e.into()),
    };
    let iterations = feas.iterations + r.iterations;
    match r.status {
        ObjectiveStatus::Optimal => {
            let z = compiled.unknowns(&r.y);
            let mut x = vec![vec![0.0; n]; n];
            for (&(i, j), &p) in &param {
                let v = z[unknown(p)];
                x[i][j] = v;
                x[j][i] = v;
            }
            let value = c0 + r.value;
            if value < -opts.tol_feas {
                return Ok(SearchReport {
                    bounded_value: value,
                    ..done(ObjectiveStatus::Unbounded, f64::NEG_INFINITY, Some(x), iterations)
                });
            }
            Ok(SearchReport { bounded_value: value, ..done(ObjectiveStatus::Optimal, value, Some(x), iterations) })
        }
        ObjectiveStatus::Unbounded => Ok(done(ObjectiveStatus::Unbounded, f64::NEG_INFINITY, None, iterations)),
        ObjectiveStatus::Infeasible => Ok(done(ObjectiveStatus::Infeasible, f64::INFINITY, None, iterations)),
    }
}

fn accurate_enough(r: &ObjectiveReport) -> bool {
    r.status == ObjectiveStatus::Optimal && r.primal_residual < 1e-6 && r.dual_residual < 1e-6 && r.gap < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;
    use states::bose_deviation;

    #[test]
    fn rho_xx_tb_is_bose_and_ldui() {
        let x = RealSymmetric::from_fn(3, |i, j| 1.0 + (i * j) as f64).unwrap();
        let rho = rho_xx_tb(&x).unwrap();
        assert!(bose_deviation(&rho).unwrap() < 1e-14);
        assert!(states::has_support(&rho, Regime::Ldui, 0.0).unwrap());
        assert_eq!(rho.get(1, 3).re, x.get(0, 1));
        assert_eq!(rho.get(0, 4).re, 0.0);
    }

    #[test]
    fn dnn_examples() {
        assert!(is_doubly_nonnegative(&RealSymmetric::from_fn(4, |_, _| 1.0).unwrap()));
        let x = RealSymmetric::from_fn(2, |i, j| if i == j { 2.0 } else { -1.0 }).unwrap();
        assert!(!is_doubly_nonnegative(&x));
    }
}
