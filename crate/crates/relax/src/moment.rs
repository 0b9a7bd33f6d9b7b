//! Moment form of the DPS hierarchy.
//!
//! A level-`t` certificate is a linear functional `L` on monomials
//! `x^gamma conj(x)^gamma' y^delta conj(y)^delta'` with `|gamma| = |gamma'| = 1`
//! and `|delta| = |delta'| = t`. The partially transposed extensions become
//! the moment matrices indexed by `x_{i0} y^beta conj(y)^{beta'}`.

use std::collections::BTreeMap;

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DVector;
use patterns::{
    exponents, moment_block_layout, moment_entry, multinomial, Entry, ExponentVec, MomentKey, MomentLabel, Regime,
};

use crate::kernel::{restrict, state_kernels, StateKernels};
use crate::model::{prepare, DpsModel, Equality, Formalism, HermBlock, Hierarchy, ModelOptions, Term, VarKey};
use crate::RelaxError;

/// Right-hand side linear in real parameters: `rho_{a,b} = sum coef * p`.
#[derive(Clone, Debug, Default)]
pub struct LinearRho {
    pub n: usize,
    pub params: usize,
    /// Upper triangle `a <= b` of the `n^2 x n^2` state.
    pub entries: BTreeMap<(usize, usize), Vec<(usize, Complex64)>>,
}

pub fn build_dps_moment(rho: &HermitianMatrix, t: usize, regime: Regime) -> Result<DpsModel, RelaxError> {
    build_dps_moment_with(rho, t, regime, &ModelOptions::default())
}

pub fn build_dps_moment_with(
    rho: &HermitianMatrix,
    t: usize,
    regime: Regime,
    opts: &ModelOptions,
) -> Result<DpsModel, RelaxError> {
    if t == 0 {
        return Err(RelaxError::Level);
    }
    let (n, rho_n, scale) = prepare(rho)?;
    check_support(&rho_n, regime)?;
    let real_only = opts.real_certificates && rho_n.is_real(1e-12);
    let kernels = opts.facial_reduction.then(|| state_kernels(&rho_n, opts.kernel_tol));
    let mut model = DpsModel::new(n, t, regime, Hierarchy::Dps, Formalism::Moment, rho_n.clone(), scale);
    moment_blocks(&mut model, real_only, kernels.as_ref());
    let d = n * n;
    for a in 0..d {
        for b in a..d {
            let (terms, label) = trace_terms(&mut model, a, b, real_only);
            let rhs = rho_n.get(a, b);
            if terms.is_empty() {
                continue;
            }
            model.equalities.push(Equality { label, terms, rhs });
        }
    }
    Ok(model)
}

/// Moment model whose state is an affine function of real parameters; the
/// parameters are declared as [`VarKey::Param`] variables.
pub fn build_dps_moment_linear(
    lr: &LinearRho,
    t: usize,
    regime: Regime,
    opts: &ModelOptions,
) -> Result<DpsModel, RelaxError> {
    if t == 0 {
        return Err(RelaxError::Level);
    }
    let n = lr.n;
    let zero = HermitianMatrix::zeros(n * n, vec![n, n]).map_err(states::StateError::from)?;
    let mut model = DpsModel::new(n, t, regime, Hierarchy::Dps, Formalism::Moment, zero, 1.0);
    let real_only = opts.real_certificates && lr.entries.values().flatten().all(|(_, c)| c.im == 0.0);
    for p in 0..lr.params {
        model.term(VarKey::Param(p), Complex64::new(1.0, 0.0), true);
    }
    moment_blocks(&mut model, real_only, None);
    let d = n * n;
    for a in 0..d {
        for b in a..d {
            let (mut terms, label) = trace_terms(&mut model, a, b, real_only);
            if let Some(ps) = lr.entries.get(&(a, b)) {
                for &(p, c) in ps {
                    terms.push(model.term(VarKey::Param(p), -c, true));
                }
            }
            if terms.is_empty() {
                continue;
            }
            model.equalities.push(Equality { label, terms, rhs: Complex64::new(0.0, 0.0) });
        }
    }
    Ok(model)
}

pub(crate) fn check_support(rho: &HermitianMatrix, regime: Regime) -> Result<(), RelaxError> {
    let n = rho.registers()[0];
    let mut worst: f64 = 0.0;
    for a in 0..n * n {
        for b in 0..n * n {
            if !states::in_support(regime, a / n, a % n, b / n, b % n) {
                worst = worst.max(rho.get(a, b).norm());
            }
        }
    }
    if worst > 1e-10 {
        return Err(RelaxError::Support { regime, value: worst });
    }
    Ok(())
}

/// `sum_{|mu| = t-1} multinomial(mu) L(x_i conj(x_j) y^{e_k + mu} conj(y)^{e_l + mu})`
/// for `a = ik`, `b = jl`.
fn trace_terms(model: &mut DpsModel, a: usize, b: usize, real_only: bool) -> (Vec<Term>, String) {
    let (n, t, regime) = (model.n, model.t, model.regime);
    let (i, k) = (a / n, a % n);
    let (j, l) = (b / n, b % n);
    let mut terms = Vec::new();
    for mu in exponents(n, t - 1) {
        let la = MomentLabel { i0: i, beta: ExponentVec::unit(n, k).add(&mu), beta_p: ExponentVec::zero(n) };
        let lb = MomentLabel { i0: j, beta: ExponentVec::unit(n, l).add(&mu), beta_p: ExponentVec::zero(n) };
        if let Entry::Var(v) = moment_entry(regime, &la, &lb) {
            let key = if v.conj { v.key.conjugate() } else { v.key };
            let coef = Complex64::new(multinomial(&mu) as f64, 0.0);
            terms.push(model.term(VarKey::Moment(key), coef, real_only));
        }
    }
    (terms, format!("trace[{i}{k},{j}{l}]"))
}

fn label_weight(l: &MomentLabel) -> f64 {
    1.0 / (multinomial(&l.beta) as f64 * multinomial(&l.beta_p) as f64)
}

fn moment_blocks(model: &mut DpsModel, real_only: bool, kernels: Option<&StateKernels>) {
    let (n, t, regime) = (model.n, model.t, model.regime);
    for layout in moment_block_layout(n, t, regime) {
        let depth = layout.depth();
        let sizes = layout.sizes();
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut pos: BTreeMap<&MomentLabel, usize> = BTreeMap::new();
        let mut acc = 0;
        for b in &layout.blocks {
            offsets.push(acc);
            for (r, l) in b.basis.iter().enumerate() {
                pos.insert(l, acc + r);
            }
            acc += b.basis.len();
        }
        let mut kern: Vec<Vec<DVector<Complex64>>> = vec![Vec::new(); layout.blocks.len()];
        if let Some(k) = kernels {
            let total = acc;
            let mut push =
                |w: &DVector<Complex64>, beta_rest: &ExponentVec, betap_rest: &ExponentVec, on_beta: bool| {
                    let mut u = vec![Complex64::new(0.0, 0.0); total];
                    for a in 0..n {
                        for b in 0..n {
                            let wv = w[a * n + b];
                            if wv == Complex64::new(0.0, 0.0) {
                                continue;
                            }
                            let eb = ExponentVec::unit(n, b);
                            let label = if on_beta {
                                MomentLabel { i0: a, beta: eb.add(beta_rest), beta_p: betap_rest.clone() }
                            } else {
                                MomentLabel { i0: a, beta: beta_rest.clone(), beta_p: eb.add(betap_rest) }
                            };
                            u[pos[&label]] += wv;
                        }
                    }
                    restrict(&u, &offsets, &sizes, &mut kern);
                };
            // ker rho pairs A with an untransposed register.
            if depth < t {
                for w in &k.rho {
                    for g in exponents(n, t - depth - 1) {
                        for gp in exponents(n, depth) {
                            push(w, &g, &gp, true);
                        }
                    }
                }
            }
            // ker rho^{T_B} pairs A with a transposed register.
            if depth >= 1 {
                for w in &k.rho_tb {
                    for g in exponents(n, t - depth) {
                        for gp in exponents(n, depth - 1) {
                            push(w, &g, &gp, false);
                        }
                    }
                }
            }
        }
        for (bi, blk) in layout.blocks.iter().enumerate() {
            let dim = blk.basis.len();
            let mut entries = BTreeMap::new();
            for r in 0..dim {
                for c in r..dim {
                    if let Entry::Var(v) = layout.entry(bi, r, c) {
                        let key: MomentKey = v.key;
                        let mut term = model.term(VarKey::Moment(key), Complex64::new(1.0, 0.0), real_only);
                        term.conj ^= v.conj;
                        entries.insert((r, c), vec![term]);
                    }
                }
            }
            model.blocks.push(HermBlock {
                label: format!("s'={} block {bi}", layout.s_prime),
                dim,
                entries,
                weights: blk.basis.iter().map(label_weight).collect(),
                kernel: std::mem::take(&mut kern[bi]),
            });
        }
    }
}
