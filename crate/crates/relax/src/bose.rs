//! Moment form of the Bose-symmetric hierarchy.
//!
//! With all `t + 1` registers symmetric, a certificate is a functional on
//! monomials `x^delta conj(x)^{delta'}` with `|delta| = |delta'| = t + 1`. The
//! block for `s` transposed registers is indexed by `x^beta conj(x)^{beta'}`
//! with `|beta| = t + 1 - s` and `|beta'| = s`; its `(a, b)` entry is
//! `L(x^{a.beta + b.beta'} conj(x)^{a.beta' + b.beta})`.

use std::collections::BTreeMap;

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DVector;
use patterns::{exponents, multinomial, ExponentVec, Regime};

use crate::kernel::{restrict, state_kernels, StateKernels};
use crate::model::{prepare, DpsModel, Equality, Formalism, HermBlock, Hierarchy, ModelOptions, Term, VarKey};
use crate::RelaxError;

pub(crate) fn check_bose(rho: &HermitianMatrix, ldui: bool) -> Result<(), RelaxError> {
    let dev = states::bose_deviation(rho)?;
    if dev > 1e-10 {
        return Err(RelaxError::NotBose(dev));
    }
    if ldui {
        crate::moment::check_support(rho, Regime::Ldui)?;
    }
    Ok(())
}

pub fn build_dps_bose(rho: &HermitianMatrix, t: usize, ldui_filter: bool) -> Result<DpsModel, RelaxError> {
    build_dps_bose_with(rho, t, ldui_filter, &ModelOptions::default())
}

type Label = (ExponentVec, ExponentVec);

pub fn build_dps_bose_with(
    rho: &HermitianMatrix,
    t: usize,
    ldui: bool,
    opts: &ModelOptions,
) -> Result<DpsModel, RelaxError> {
    if t == 0 {
        return Err(RelaxError::Level);
    }
    let (n, rho_n, scale) = prepare(rho)?;
    check_bose(&rho_n, ldui)?;
    let regime = if ldui { Regime::Ldui } else { Regime::Generic };
    let real_only = opts.real_certificates && rho_n.is_real(1e-12);
    let kernels = opts.facial_reduction.then(|| state_kernels(&rho_n, opts.kernel_tol));
    let mut model = DpsModel::new(n, t, regime, Hierarchy::Bose, Formalism::Moment, rho_n.clone(), scale);

    for s in 0..=t.div_ceil(2) {
        let mut groups: BTreeMap<Vec<i32>, Vec<Label>> = BTreeMap::new();
        for b in exponents(n, t + 1 - s) {
            for bp in exponents(n, s) {
                let key =
                    if ldui { b.0.iter().zip(&bp.0).map(|(&x, &y)| x as i32 - y as i32).collect() } else { Vec::new() };
                groups.entry(key).or_default().push((b.clone(), bp));
            }
        }
        let blocks: Vec<Vec<Label>> = groups.into_values().collect();
        let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
        let mut offsets = Vec::new();
        let mut pos: BTreeMap<&Label, usize> = BTreeMap::new();
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            for (r, l) in b.iter().enumerate() {
                pos.insert(l, acc + r);
            }
            acc += b.len();
        }
        let mut kern: Vec<Vec<DVector<Complex64>>> = vec![Vec::new(); blocks.len()];
        if let Some(StateKernels { rho: kr, rho_tb: kt }) = kernels.as_ref() {
            let mut push = |w: &DVector<Complex64>, g: &ExponentVec, gp: &ExponentVec, on_beta: bool| {
                let mut u = vec![Complex64::new(0.0, 0.0); acc];
                for a in 0..n {
                    for b in 0..n {
                        let wv = w[a * n + b];
                        if wv == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let (ea, eb) = (ExponentVec::unit(n, a), ExponentVec::unit(n, b));
                        let label = if on_beta { (ea.add(&eb).add(g), gp.clone()) } else { (ea.add(g), eb.add(gp)) };
                        u[pos[&label]] += wv;
                    }
                }
                restrict(&u, &offsets, &sizes, &mut kern);
            };
            // ker rho needs two untransposed registers.
            if t + 1 - s >= 2 {
                for w in kr {
                    for g in exponents(n, t - 1 - s) {
                        for gp in exponents(n, s) {
                            push(w, &g, &gp, true);
                        }
                    }
                }
            }
            if s >= 1 {
                for w in kt {
                    for g in exponents(n, t - s) {
                        for gp in exponents(n, s - 1) {
                            push(w, &g, &gp, false);
                        }
                    }
                }
            }
        }
        for (bi, basis) in blocks.iter().enumerate() {
            let dim = basis.len();
            let mut entries = BTreeMap::new();
            for r in 0..dim {
                for c in r..dim {
                    let (a, b) = (&basis[r], &basis[c]);
                    let key = VarKey::Bose { delta: a.0.add(&b.1), delta_p: a.1.add(&b.0) };
                    let term = model.term(key, Complex64::new(1.0, 0.0), real_only);
                    entries.insert((r, c), vec![term]);
                }
            }
            let weights = basis.iter().map(|(b, bp)| 1.0 / (multinomial(b) as f64 * multinomial(bp) as f64)).collect();
            model.blocks.push(HermBlock {
                label: format!("s={s} block {bi}"),
                dim,
                entries,
                weights,
                kernel: std::mem::take(&mut kern[bi]),
            });
        }
    }

    let d = n * n;
    for a in 0..d {
        for b in a..d {
            let (i, j, k, l) = (a / n, a % n, b / n, b % n);
            let mut terms: Vec<Term> = Vec::new();
            for mu in exponents(n, t - 1) {
                let delta = ExponentVec::unit(n, i).add(&ExponentVec::unit(n, j)).add(&mu);
                let delta_p = ExponentVec::unit(n, k).add(&ExponentVec::unit(n, l)).add(&mu);
                if ldui && delta != delta_p {
                    continue;
                }
                let coef = Complex64::new(multinomial(&mu) as f64, 0.0);
                terms.push(model.term(VarKey::Bose { delta, delta_p }, coef, real_only));
            }
            if !terms.is_empty() {
                model.equalities.push(Equality { label: format!("trace[{i}{j},{k}{l}]"), terms, rhs: rho_n.get(a, b) });
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use states::dicke;

    #[test]
    fn level_one_blocks() {
        let rho = dicke(3, 0, 1).add(&dicke(3, 2, 2));
        let m = build_dps_bose(&rho, 1, false).unwrap();
        // Symmetric part of rho (6) and rho^{T_B} (9).
        assert_eq!(m.block_sizes(), vec![6, 9]);
    }

    #[test]
    fn rejects_non_bose_input() {
        let mut v = vec![Complex64::new(0.0, 0.0); 9];
        v[1] = Complex64::new(1.0, 0.0);
        let rho = HermitianMatrix::outer(&v, vec![3, 3]).unwrap();
        assert!(matches!(build_dps_bose(&rho, 1, false), Err(RelaxError::NotBose(_))));
    }

    #[test]
    fn ldui_filter_refines_blocks() {
        let rho = dicke(3, 0, 1).add(&dicke(3, 1, 2));
        let m = build_dps_bose(&rho, 2, true).unwrap();
        let g = build_dps_bose(&rho, 2, false).unwrap();
        assert!(m.blocks.len() > g.blocks.len());
        assert_eq!(m.block_sizes().iter().sum::<usize>(), g.block_sizes().iter().sum::<usize>());
    }
}
