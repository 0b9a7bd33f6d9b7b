//! Tensor form of the hierarchies, used as an oracle for the moment builders.
//!
//! Certificates live on `(C^n)^{⊗(t+1)}`; entries are grouped into variables
//! by the orbits of the symmetric group acting on the symmetrized registers.
//! Each partially transposed certificate is split by
//! [`patterns::tensor_block_layout`] (DPS) or by connected components (Bose
//! symmetric case) and compressed onto an orthonormal basis of the
//! sub-symmetric subspace it is supported on.

use std::collections::BTreeMap;

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::DVector;
use patterns::{sequences, tensor_block_layout, ExponentVec, MomentKey, Regime};

use crate::kernel::{state_kernels, StateKernels};
use crate::model::{prepare, DpsModel, Equality, Formalism, HermBlock, Hierarchy, ModelOptions, Term, VarKey};
use crate::moment::check_support;
use crate::RelaxError;

fn counts(n: usize, xs: &[usize]) -> ExponentVec {
    let mut v = vec![0u16; n];
    for &x in xs {
        v[x] += 1;
    }
    ExponentVec(v)
}

/// Tensor entry `T_{(i0,i),(j0,j)}` of a DPS certificate as a variable key,
/// or `None` when the regime forces it to vanish.
fn dps_entry(n: usize, regime: Regime, row: &[usize], col: &[usize]) -> Option<VarKey> {
    let (i0, i) = (row[0], &row[1..]);
    let (j0, j) = (col[0], &col[1..]);
    let alive = match regime {
        Regime::Generic => true,
        Regime::Cldui => {
            let mut l = i.to_vec();
            l.push(j0);
            let mut r = j.to_vec();
            r.push(i0);
            counts(n, &l) == counts(n, &r)
        }
        Regime::Ldui => counts(n, row) == counts(n, col),
        Regime::Ldoi => {
            let all: Vec<usize> = row.iter().chain(col).copied().collect();
            counts(n, &all).0.iter().all(|c| c % 2 == 0)
        }
    };
    alive.then(|| {
        VarKey::Moment(MomentKey {
            gamma: ExponentVec::unit(n, i0),
            gamma_p: ExponentVec::unit(n, j0),
            delta: counts(n, i),
            delta_p: counts(n, j),
        })
    })
}

fn bose_entry(n: usize, ldui: bool, row: &[usize], col: &[usize]) -> Option<VarKey> {
    let (delta, delta_p) = (counts(n, row), counts(n, col));
    (!ldui || delta == delta_p).then_some(VarKey::Bose { delta, delta_p })
}

/// Exchanges registers `1..=s` between row and column.
fn transpose_b(row: &[usize], col: &[usize], s: usize) -> (Vec<usize>, Vec<usize>) {
    let mut r = row.to_vec();
    let mut c = col.to_vec();
    for k in 1..=s {
        std::mem::swap(&mut r[k], &mut c[k]);
    }
    (r, c)
}

/// Orbit of a tensor index under permutations within the transposed
/// registers `1..=s` and within the untransposed symmetric registers.
fn orbit_key(n: usize, seq: &[usize], s: usize, bose: bool) -> (Vec<usize>, ExponentVec, ExponentVec) {
    let transposed = counts(n, &seq[1..=s]);
    if bose {
        let rest: Vec<usize> = std::iter::once(seq[0]).chain(seq[s + 1..].iter().copied()).collect();
        (Vec::new(), counts(n, &rest), transposed)
    } else {
        (vec![seq[0]], counts(n, &seq[s + 1..]), transposed)
    }
}

struct Compressed {
    /// Orbits in order, each with its member tensor indices.
    orbits: Vec<Vec<Vec<usize>>>,
}

fn compress(n: usize, members: &[Vec<usize>], s: usize, bose: bool) -> Compressed {
    let mut groups: BTreeMap<(Vec<usize>, ExponentVec, ExponentVec), Vec<Vec<usize>>> = BTreeMap::new();
    for m in members {
        groups.entry(orbit_key(n, m, s, bose)).or_default().push(m.clone());
    }
    Compressed { orbits: groups.into_values().collect() }
}

/// Entries of `V^T B V` for the compressed orbit basis, where `entry`
/// returns the tensor entry of the partially transposed certificate.
fn compressed_entries<F>(
    model: &mut DpsModel,
    c: &Compressed,
    real_only: bool,
    mut entry: F,
) -> BTreeMap<(usize, usize), Vec<Term>>
where
    F: FnMut(&[usize], &[usize]) -> Option<VarKey>,
{
    let mut out = BTreeMap::new();
    for (p, op) in c.orbits.iter().enumerate() {
        for (q, oq) in c.orbits.iter().enumerate().skip(p) {
            let w = 1.0 / ((op.len() * oq.len()) as f64).sqrt();
            let mut acc: BTreeMap<(usize, bool), Complex64> = BTreeMap::new();
            for x in op {
                for y in oq {
                    if let Some(key) = entry(x, y) {
                        let t = model.term(key, Complex64::new(w, 0.0), real_only);
                        *acc.entry((t.var, t.conj)).or_insert(Complex64::new(0.0, 0.0)) += t.coef;
                    }
                }
            }
            let terms: Vec<Term> = acc
                .into_iter()
                .filter(|(_, v)| v.norm() > 0.0)
                .map(|((var, conj), coef)| Term { var, conj, coef })
                .collect();
            if !terms.is_empty() {
                out.insert((p, q), terms);
            }
        }
    }
    out
}

/// Compressed kernel vectors: `w` on registers `(0, reg)` tensored with
/// every basis vector on the remaining registers.
fn compressed_kernel(
    n: usize,
    t: usize,
    c: &Compressed,
    w: &DVector<Complex64>,
    reg: usize,
    out: &mut Vec<DVector<Complex64>>,
) {
    for rest in sequences(n, t - 1) {
        let mut u = vec![Complex64::new(0.0, 0.0); c.orbits.len()];
        for (p, orbit) in c.orbits.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for x in orbit {
                let others: Vec<usize> = (1..=t).filter(|&r| r != reg).map(|r| x[r]).collect();
                if others == rest {
                    acc += w[x[0] * n + x[reg]];
                }
            }
            u[p] = acc / (orbit.len() as f64).sqrt();
        }
        if u.iter().any(|v| v.norm() > 1e-14) {
            out.push(DVector::from_vec(u));
        }
    }
}

pub fn build_dps_tensor(rho: &HermitianMatrix, t: usize, regime: Regime) -> Result<DpsModel, RelaxError> {
    build_dps_tensor_with(rho, t, regime, &ModelOptions::default())
}

pub fn build_dps_tensor_with(
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
    let mut model = DpsModel::new(n, t, regime, Hierarchy::Dps, Formalism::Tensor, rho_n.clone(), scale);
    for s in 0..=t {
        let layout = tensor_block_layout(n, t, s, regime).expect("depth within level");
        for (ci, clique) in layout.cliques.iter().enumerate() {
            let c = compress(n, &clique.members, s, false);
            let entries = compressed_entries(&mut model, &c, real_only, |x, y| {
                let (r, cc) = transpose_b(x, y, s);
                dps_entry(n, regime, &r, &cc)
            });
            let mut kernel = Vec::new();
            if let Some(StateKernels { rho: kr, rho_tb: kt }) = kernels.as_ref() {
                if s < t {
                    for w in kr {
                        compressed_kernel(n, t, &c, w, t, &mut kernel);
                    }
                }
                if s >= 1 {
                    for w in kt {
                        compressed_kernel(n, t, &c, w, 1, &mut kernel);
                    }
                }
            }
            model.blocks.push(HermBlock {
                label: format!("s={s} clique {ci}"),
                dim: c.orbits.len(),
                entries,
                weights: vec![1.0; c.orbits.len()],
                kernel,
            });
        }
    }
    push_trace_equalities(&mut model, &rho_n, real_only, |r, c| dps_entry(n, regime, r, c));
    Ok(model)
}

/// `sum_{rest} T_{(i,k,rest),(j,l,rest)} = rho_{ik,jl}`.
fn push_trace_equalities<F>(model: &mut DpsModel, rho: &HermitianMatrix, real_only: bool, entry: F)
where
    F: Fn(&[usize], &[usize]) -> Option<VarKey>,
{
    let (n, t) = (model.n, model.t);
    let d = n * n;
    for a in 0..d {
        for b in a..d {
            let mut acc: BTreeMap<(usize, bool), Complex64> = BTreeMap::new();
            for rest in sequences(n, t - 1) {
                let row: Vec<usize> = [a / n, a % n].into_iter().chain(rest.iter().copied()).collect();
                let col: Vec<usize> = [b / n, b % n].into_iter().chain(rest.iter().copied()).collect();
                if let Some(key) = entry(&row, &col) {
                    let tm = model.term(key, Complex64::new(1.0, 0.0), real_only);
                    *acc.entry((tm.var, tm.conj)).or_insert(Complex64::new(0.0, 0.0)) += tm.coef;
                }
            }
            let terms: Vec<Term> = acc.into_iter().map(|((var, conj), coef)| Term { var, conj, coef }).collect();
            if !terms.is_empty() {
                model.equalities.push(Equality { label: format!("trace[{a},{b}]"), terms, rhs: rho.get(a, b) });
            }
        }
    }
}

pub fn build_bose_tensor(rho: &HermitianMatrix, t: usize, ldui_filter: bool) -> Result<DpsModel, RelaxError> {
    build_bose_tensor_with(rho, t, ldui_filter, &ModelOptions::default())
}

/// Tensor form of the Bose-symmetric hierarchy: `T` on the symmetric
/// subspace of `(C^n)^{⊗(t+1)}` with `T^{T_{B[1:s]}} ⪰ 0` for
/// `s = 0..=(t+1)/2`.
pub fn build_bose_tensor_with(
    rho: &HermitianMatrix,
    t: usize,
    ldui: bool,
    opts: &ModelOptions,
) -> Result<DpsModel, RelaxError> {
    if t == 0 {
        return Err(RelaxError::Level);
    }
    let (n, rho_n, scale) = prepare(rho)?;
    crate::bose::check_bose(&rho_n, ldui)?;
    let regime = if ldui { Regime::Ldui } else { Regime::Generic };
    let real_only = opts.real_certificates && rho_n.is_real(1e-12);
    let kernels = opts.facial_reduction.then(|| state_kernels(&rho_n, opts.kernel_tol));
    let mut model = DpsModel::new(n, t, regime, Hierarchy::Bose, Formalism::Tensor, rho_n.clone(), scale);
    let all: Vec<Vec<usize>> = sequences(n, t + 1).collect();
    for s in 0..=t.div_ceil(2) {
        let c = compress(n, &all, s, true);
        let entries = compressed_entries(&mut model, &c, real_only, |x, y| {
            let (r, cc) = transpose_b(x, y, s);
            bose_entry(n, ldui, &r, &cc)
        });
        let mut kernel = Vec::new();
        if let Some(k) = kernels.as_ref() {
            if s < t {
                for w in &k.rho {
                    compressed_kernel(n, t, &c, w, t, &mut kernel);
                }
            }
            if s >= 1 {
                for w in &k.rho_tb {
                    compressed_kernel(n, t, &c, w, 1, &mut kernel);
                }
            }
        }
        // Split into connected components of the entry graph.
        let d = c.orbits.len();
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let nx = p[y];
                p[y] = r;
                y = nx;
            }
            r
        }
        for &(r, cc) in entries.keys() {
            let (a, b) = (find(&mut parent, r), find(&mut parent, cc));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..d {
            let root = find(&mut parent, i);
            comps.entry(root).or_default().push(i);
        }
        for (ci, members) in comps.values().enumerate() {
            let pos: BTreeMap<usize, usize> = members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let sub: BTreeMap<(usize, usize), Vec<Term>> = entries
                .iter()
                .filter(|((r, _), _)| pos.contains_key(r))
                .map(|(&(r, cc), v)| ((pos[&r], pos[&cc]), v.clone()))
                .collect();
            let sub_kernel: Vec<DVector<Complex64>> = kernel
                .iter()
                .map(|v| DVector::from_iterator(members.len(), members.iter().map(|&i| v[i])))
                .filter(|v: &DVector<Complex64>| v.iter().any(|x| x.norm() > 1e-14))
                .collect();
            model.blocks.push(HermBlock {
                label: format!("s={s} component {ci}"),
                dim: members.len(),
                entries: sub,
                weights: vec![1.0; members.len()],
                kernel: sub_kernel,
            });
        }
    }
    push_trace_equalities(&mut model, &rho_n, real_only, |r, c| bose_entry(n, ldui, r, c));
    Ok(model)
}
