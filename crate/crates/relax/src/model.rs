//! Hermitian affine models and their lowering to real LMI problems.
//!
//! Pipeline: complex moment variables -> real unknowns (real and imaginary
//! parts) -> facial reduction on known kernels -> elimination of equality
//! constraints -> real symmetric blocks (via the real embedding when a block
//! carries imaginary parts).

use std::collections::BTreeMap;

use hermitian_core::{Complex64, HermitianMatrix};
use nalgebra::{DMatrix, DVector};
use patterns::{ExponentVec, MomentKey, Regime};
use sdp::{LmiBlock, LmiProblem};
use serde::Serialize;

use crate::RelaxError;

/// Key of a certificate variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum VarKey {
    /// `L(x^gamma conj(x)^gamma' y^delta conj(y)^delta')`.
    Moment(MomentKey),
    /// Single-variable-set moment `L(x^delta conj(x)^delta')`.
    Bose { delta: ExponentVec, delta_p: ExponentVec },
    /// Real parameter entering the right-hand sides of the equalities.
    Param(usize),
}

impl VarKey {
    pub fn conjugate(&self) -> Self {
        match self {
            VarKey::Moment(k) => VarKey::Moment(k.conjugate()),
            VarKey::Bose { delta, delta_p } => VarKey::Bose { delta: delta_p.clone(), delta_p: delta.clone() },
            VarKey::Param(p) => VarKey::Param(*p),
        }
    }

    /// Canonical representative and whether `self` is its conjugate.
    pub fn canonical(self) -> (Self, bool) {
        let c = self.conjugate();
        if c < self {
            (c, true)
        } else {
            (self, false)
        }
    }

    pub fn is_self_conjugate(&self) -> bool {
        *self == self.conjugate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarInfo {
    pub key: VarKey,
    /// True when the variable is real: self-conjugate, or imaginary parts pinned.
    pub real: bool,
}

/// `coef * v` or `coef * conj(v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub var: usize,
    pub conj: bool,
    pub coef: Complex64,
}

/// Hermitian block whose entries are linear in the variables. Only the upper
/// triangle is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct HermBlock {
    pub label: String,
    pub dim: usize,
    pub entries: BTreeMap<(usize, usize), Vec<Term>>,
    /// Diagonal margin weights.
    pub weights: Vec<f64>,
    /// Vectors known to lie in the kernel of the block for every certificate.
    pub kernel: Vec<DVector<Complex64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equality {
    pub label: String,
    pub terms: Vec<Term>,
    pub rhs: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Hierarchy {
    Dps,
    Bose,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Formalism {
    Moment,
    Tensor,
}

/// A DPS-type membership problem before lowering.
#[derive(Clone, Debug)]
pub struct DpsModel {
    pub n: usize,
    pub t: usize,
    pub regime: Regime,
    pub hierarchy: Hierarchy,
    pub formalism: Formalism,
    /// Trace of the input state; the model works with `rho / scale`.
    pub scale: f64,
    pub rho: HermitianMatrix,
    pub vars: Vec<VarInfo>,
    pub blocks: Vec<HermBlock>,
    pub equalities: Vec<Equality>,
    pub index: BTreeMap<VarKey, usize>,
}

/// Options shared by every builder.
#[derive(Clone, Debug)]
pub struct ModelOptions {
    /// Pin imaginary parts to zero when the state is real.
    pub real_certificates: bool,
    /// Restrict blocks to the complement of propagated kernels.
    pub facial_reduction: bool,
    /// Weight margins by `1/(N(beta) N(beta'))` so they match the tensor form.
    pub margin_weights: bool,
    /// Eigenvalue threshold (relative to the trace-normalized state) for kernels.
    pub kernel_tol: f64,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { real_certificates: true, facial_reduction: true, margin_weights: true, kernel_tol: 1e-9 }
    }
}

impl DpsModel {
    pub(crate) fn new(
        n: usize,
        t: usize,
        regime: Regime,
        hierarchy: Hierarchy,
        formalism: Formalism,
        rho: HermitianMatrix,
        scale: f64,
    ) -> Self {
        Self {
            n,
            t,
            regime,
            hierarchy,
            formalism,
            scale,
            rho,
            vars: Vec::new(),
            blocks: Vec::new(),
            equalities: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    /// Term for a possibly non-canonical key, declaring the variable if new.
    pub(crate) fn term(&mut self, key: VarKey, coef: Complex64, real_only: bool) -> Term {
        let (key, conj) = key.canonical();
        let var = match self.index.get(&key) {
            Some(&v) => v,
            None => {
                let v = self.vars.len();
                let real = real_only || key.is_self_conjugate();
                self.vars.push(VarInfo { key: key.clone(), real });
                self.index.insert(key, v);
                v
            }
        };
        Term { var, conj, coef }
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    /// Debug dump listing variables, blocks, and equality constraints.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let blocks: Vec<_> = self
            .blocks
            .iter()
            .map(|b| {
                let entries: Vec<_> = b.entries.iter().map(|(&(r, c), terms)| json!([r, c, terms])).collect();
                json!({
                    "label": b.label,
                    "dim": b.dim,
                    "entries": entries,
                    "weights": b.weights,
                    "kernel_vectors": b.kernel.len(),
                })
            })
            .collect();
        json!({
            "n": self.n,
            "t": self.t,
            "regime": self.regime,
            "hierarchy": self.hierarchy,
            "formalism": self.formalism,
            "scale": self.scale,
            "variables": self.vars,
            "blocks": blocks,
            "equalities": self.equalities,
        })
    }

    /// Value of a key under a variable assignment (zero for undeclared keys).
    pub fn key_value(&self, values: &[Complex64], key: &VarKey) -> Complex64 {
        let (k, conj) = key.clone().canonical();
        match self.index.get(&k) {
            Some(&v) => {
                if conj {
                    values[v].conj()
                } else {
                    values[v]
                }
            }
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Dense evaluation of a block.
    pub fn eval_block(&self, b: &HermBlock, values: &[Complex64]) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(b.dim, b.dim);
        for (&(r, c), terms) in &b.entries {
            let v: Complex64 = terms.iter().map(|t| eval_term(t, values)).sum();
            m[(r, c)] = v;
            if r != c {
                m[(c, r)] = v.conj();
            }
        }
        m
    }
}

pub(crate) fn eval_term(t: &Term, values: &[Complex64]) -> Complex64 {
    let v = if t.conj { values[t.var].conj() } else { values[t.var] };
    t.coef * v
}

/// Upper-triangular sparse Hermitian matrix.
type CMat = BTreeMap<(usize, usize), Complex64>;

/// Block after lowering: `B(z) = C + sum_k z_k C_k` with Hermitian `C_k`.
#[derive(Clone, Debug)]
struct LBlock {
    dim: usize,
    constant: CMat,
    mats: BTreeMap<usize, CMat>,
    margin: DMatrix<Complex64>,
}

/// Real equality `sum a_k z_k = b`.
#[derive(Clone, Debug)]
struct REq {
    terms: BTreeMap<usize, f64>,
    rhs: f64,
}

fn add_to(m: &mut CMat, key: (usize, usize), v: Complex64) {
    if v == Complex64::new(0.0, 0.0) {
        return;
    }
    let e = m.entry(key).or_insert(Complex64::new(0.0, 0.0));
    *e += v;
}

/// Real unknowns: `2v` is the real part of variable `v`, `2v + 1` its
/// imaginary part. Returns `(unknown, complex coefficient)` pairs.
fn lower_term(t: &Term, vars: &[VarInfo]) -> [(usize, Complex64); 2] {
    let sgn = if t.conj { -1.0 } else { 1.0 };
    let re = (2 * t.var, t.coef);
    let im = if vars[t.var].real {
        (2 * t.var + 1, Complex64::new(0.0, 0.0))
    } else {
        (2 * t.var + 1, t.coef * Complex64::new(0.0, sgn))
    };
    [re, im]
}

/// Orthonormal bases `(K, Q)` of `span(kernel)` and its complement.
fn split_space(kernel: &[DVector<Complex64>], d: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let mut g = DMatrix::<Complex64>::zeros(d, d);
    for v in kernel {
        let nv = v.norm();
        if nv > 0.0 {
            let u = v / Complex64::new(nv, 0.0);
            g += &u * u.adjoint();
        }
    }
    let h = HermitianMatrix::new(g, vec![]).expect("Gram matrix is Hermitian");
    let (vals, vecs) = h.eigh();
    let top = vals.last().copied().unwrap_or(0.0).max(1e-300);
    let kcols: Vec<usize> = (0..d).filter(|&i| vals[i] > 1e-8 * top).collect();
    let qcols: Vec<usize> = (0..d).filter(|&i| vals[i] <= 1e-8 * top).collect();
    (vecs.select_columns(kcols.iter()), vecs.select_columns(qcols.iter()))
}

/// Lowered model ready for elimination.
#[derive(Clone, Debug)]
pub struct Lowered {
    blocks: Vec<LBlock>,
    eqs: Vec<REq>,
    num_unknowns: usize,
}

/// Real LMI problem plus the data needed to map a solution back.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub problem: LmiProblem,
    /// LMI variable -> real unknown.
    pub free: Vec<usize>,
    /// Pivot unknown -> (rhs, [(free unknown, coefficient)]) meaning
    /// `z_p = rhs - sum coef * z_k`.
    pub pivots: BTreeMap<usize, (f64, Vec<(usize, f64)>)>,
    pub num_unknowns: usize,
    /// Model block each LMI block came from.
    pub origin: Vec<usize>,
    /// Set when the equality system has no solution.
    pub inconsistent: Option<f64>,
}

impl Compiled {
    /// Real unknowns from an LMI solution.
    pub fn unknowns(&self, y: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.num_unknowns];
        for (i, &u) in self.free.iter().enumerate() {
            z[u] = y[i];
        }
        for (&p, (rhs, row)) in &self.pivots {
            z[p] = rhs - row.iter().map(|&(k, c)| c * z[k]).sum::<f64>();
        }
        z
    }

    /// Rewrites `sum c_u z_u` over real unknowns as `c0 + sum_i g_i y_i` over
    /// LMI variables. `None` when the objective depends on an unknown that no
    /// block constrains.
    pub fn objective(&self, c: &BTreeMap<usize, f64>) -> Option<(f64, Vec<f64>)> {
        let pos: BTreeMap<usize, usize> = self.free.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let mut c0 = 0.0;
        let mut g = vec![0.0; self.free.len()];
        let mut add = |u: usize, w: f64| -> Option<()> {
            if w == 0.0 {
                return Some(());
            }
            g[*pos.get(&u)?] += w;
            Some(())
        };
        for (&u, &w) in c {
            match self.pivots.get(&u) {
                Some((rhs, row)) => {
                    c0 += w * rhs;
                    for &(k, a) in row {
                        add(k, -w * a)?;
                    }
                }
                None => add(u, w)?,
            }
        }
        Some((c0, g))
    }

    /// Variable values from an LMI solution.
    pub fn values(&self, y: &[f64]) -> Vec<Complex64> {
        let z = self.unknowns(y);
        (0..self.num_unknowns / 2).map(|v| Complex64::new(z[2 * v], z[2 * v + 1])).collect()
    }
}

pub fn lower(model: &DpsModel, opts: &ModelOptions) -> Lowered {
    let vars = &model.vars;
    let mut blocks = Vec::with_capacity(model.blocks.len());
    let mut eqs = Vec::new();
    for b in &model.blocks {
        let mut mats: BTreeMap<usize, CMat> = BTreeMap::new();
        for (&(r, c), terms) in &b.entries {
            for t in terms {
                for (u, coef) in lower_term(t, vars) {
                    if coef == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    // Diagonal entries are real; drop imaginary dust.
                    let coef = if r == c { Complex64::new(coef.re, 0.0) } else { coef };
                    add_to(mats.entry(u).or_default(), (r, c), coef);
                }
            }
        }
        for m in mats.values_mut() {
            m.retain(|_, v| v.norm() > 0.0);
        }
        mats.retain(|_, m| !m.is_empty());
        let w = if opts.margin_weights { b.weights.clone() } else { vec![1.0; b.dim] };
        let margin = DMatrix::from_fn(b.dim, b.dim, |i, j| Complex64::new(if i == j { w[i] } else { 0.0 }, 0.0));
        let mut lb = LBlock { dim: b.dim, constant: CMat::new(), mats, margin };
        if opts.facial_reduction && !b.kernel.is_empty() {
            facial_reduce(&mut lb, &b.kernel, &mut eqs);
        }
        blocks.push(lb);
    }
    for e in &model.equalities {
        let mut re = BTreeMap::new();
        let mut im = BTreeMap::new();
        for t in &e.terms {
            for (u, coef) in lower_term(t, vars) {
                if coef.re != 0.0 {
                    *re.entry(u).or_insert(0.0) += coef.re;
                }
                if coef.im != 0.0 {
                    *im.entry(u).or_insert(0.0) += coef.im;
                }
            }
        }
        eqs.push(REq { terms: re, rhs: e.rhs.re });
        eqs.push(REq { terms: im, rhs: e.rhs.im });
    }
    Lowered { blocks, eqs, num_unknowns: 2 * vars.len() }
}

/// Imposes `B K = 0` and replaces `B` by `Q^* B Q`.
fn facial_reduce(b: &mut LBlock, kernel: &[DVector<Complex64>], eqs: &mut Vec<REq>) {
    let d = b.dim;
    let (k, q) = split_space(kernel, d);
    let r = k.ncols();
    if r == 0 {
        return;
    }
    let basis = {
        let mut full = DMatrix::<Complex64>::zeros(d, d);
        full.columns_mut(0, r).copy_from(&k);
        full.columns_mut(r, d - r).copy_from(&q);
        full
    };
    // Rows of [K Q]^* B K: the r x r Hermitian top part and the (d-r) x r rest.
    let mut top: BTreeMap<(usize, usize, bool), BTreeMap<usize, f64>> = BTreeMap::new();
    let mut rest: BTreeMap<(usize, usize, bool), BTreeMap<usize, f64>> = BTreeMap::new();
    let mut reduced: BTreeMap<usize, CMat> = BTreeMap::new();
    for (&u, m) in &b.mats {
        let full: Vec<(usize, usize, Complex64)> = m
            .iter()
            .flat_map(|(&(r, c), &v)| {
                let lower = (r != c).then_some((c, r, v.conj()));
                std::iter::once((r, c, v)).chain(lower)
            })
            .collect();
        let scale = full.iter().map(|e| e.2.norm()).fold(0.0, f64::max);
        let tol = 1e-13 * scale.max(1e-300);
        let mut bk = DMatrix::<Complex64>::zeros(d, r);
        for &(rr, cc, v) in &full {
            for i in 0..d {
                let a = basis[(rr, i)].conj() * v;
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..r {
                    bk[(i, j)] += a * k[(cc, j)];
                }
            }
        }
        for i in 0..d {
            for j in 0..r {
                let v = bk[(i, j)];
                if i < r {
                    if i > j {
                        continue;
                    }
                    if v.re.abs() > tol {
                        top.entry((i, j, false)).or_default().insert(u, v.re);
                    }
                    if i != j && v.im.abs() > tol {
                        top.entry((i, j, true)).or_default().insert(u, v.im);
                    }
                } else {
                    if v.re.abs() > tol {
                        rest.entry((i, j, false)).or_default().insert(u, v.re);
                    }
                    if v.im.abs() > tol {
                        rest.entry((i, j, true)).or_default().insert(u, v.im);
                    }
                }
            }
        }
        if d > r {
            let dq = d - r;
            let mut red = DMatrix::<Complex64>::zeros(dq, dq);
            for &(rr, cc, v) in &full {
                for i in 0..dq {
                    let a = q[(rr, i)].conj() * v;
                    if a == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for j in i..dq {
                        red[(i, j)] += a * q[(cc, j)];
                    }
                }
            }
            let mut m2 = CMat::new();
            for i in 0..dq {
                for j in i..dq {
                    let mut v = red[(i, j)];
                    if i == j {
                        v.im = 0.0;
                    }
                    if v.re.abs() <= tol {
                        v.re = 0.0;
                    }
                    if v.im.abs() <= tol {
                        v.im = 0.0;
                    }
                    if v != Complex64::new(0.0, 0.0) {
                        m2.insert((i, j), v);
                    }
                }
            }
            if !m2.is_empty() {
                reduced.insert(u, m2);
            }
        }
    }
    for (_, terms) in top.into_iter().chain(rest) {
        eqs.push(REq { terms, rhs: 0.0 });
    }
    b.margin = q.adjoint() * &b.margin * &q;
    b.dim = d - r;
    b.mats = reduced;
    b.constant = CMat::new();
}

/// Sparse reduced row echelon form with largest-magnitude pivots.
struct Rref {
    rows: BTreeMap<usize, (BTreeMap<usize, f64>, f64)>,
    by_col: BTreeMap<usize, Vec<usize>>,
    inconsistent: Option<f64>,
}

impl Rref {
    fn new() -> Self {
        Self { rows: BTreeMap::new(), by_col: BTreeMap::new(), inconsistent: None }
    }

    fn push(&mut self, eq: &REq) {
        let scale = eq.terms.values().fold(eq.rhs.abs(), |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return;
        }
        let mut row: BTreeMap<usize, f64> = eq.terms.iter().map(|(&k, &v)| (k, v / scale)).collect();
        let mut rhs = eq.rhs / scale;
        let pivs: Vec<(usize, f64)> =
            row.iter().filter(|(k, _)| self.rows.contains_key(k)).map(|(&k, &v)| (k, v)).collect();
        for (p, c) in pivs {
            let (prow, prhs) = &self.rows[&p];
            for (&k, &v) in prow {
                *row.entry(k).or_insert(0.0) -= c * v;
            }
            rhs -= c * prhs;
        }
        let mag = row.values().fold(0.0f64, |a, v| a.max(v.abs()));
        // Rows that cancel to roundoff are dependent on earlier ones.
        if mag <= 1e-9 {
            row.clear();
        }
        row.retain(|_, v| v.abs() > 1e-12 * mag.max(1.0));
        if row.is_empty() {
            if rhs.abs() > 1e-9 {
                let worst = self.inconsistent.unwrap_or(0.0).max(rhs.abs());
                self.inconsistent = Some(worst);
            }
            return;
        }
        let (&p, &c) = row
            .iter()
            .fold(None::<(&usize, &f64)>, |best, kv| match best {
                Some(b) if b.1.abs() >= kv.1.abs() => Some(b),
                _ => Some(kv),
            })
            .expect("nonempty");
        for v in row.values_mut() {
            *v /= c;
        }
        rhs /= c;
        // Eliminate p from earlier pivot rows.
        if let Some(users) = self.by_col.remove(&p) {
            for i in users {
                let Some((irow, irhs)) = self.rows.get_mut(&i) else { continue };
                let Some(f) = irow.remove(&p) else { continue };
                for (&k, &v) in &row {
                    if k == p {
                        continue;
                    }
                    let e = irow.entry(k).or_insert(0.0);
                    *e -= f * v;
                    if e.abs() < 1e-14 {
                        irow.remove(&k);
                    } else {
                        self.by_col.entry(k).or_default().push(i);
                    }
                }
                *irhs -= f * rhs;
            }
        }
        for &k in row.keys() {
            if k != p {
                self.by_col.entry(k).or_default().push(p);
            }
        }
        self.rows.insert(p, (row, rhs));
    }
}

fn scale_cmat(m: &CMat, s: f64, into: &mut CMat) {
    for (&k, &v) in m {
        add_to(into, k, v * s);
    }
}

/// Eliminates the equalities and assembles the real LMI problem.
pub fn compile(low: &Lowered) -> Compiled {
    let mut rref = Rref::new();
    for e in &low.eqs {
        rref.push(e);
    }
    let pivots: BTreeMap<usize, (f64, Vec<(usize, f64)>)> = rref
        .rows
        .iter()
        .map(|(&p, (row, rhs))| (p, (*rhs, row.iter().filter(|(&k, _)| k != p).map(|(&k, &v)| (k, v)).collect())))
        .collect();

    // Substitute pivots.
    let mut subst_blocks: Vec<(usize, LBlock)> = Vec::new();
    for (bi, b) in low.blocks.iter().enumerate() {
        if b.dim == 0 {
            continue;
        }
        let mut constant = b.constant.clone();
        let mut mats: BTreeMap<usize, CMat> = BTreeMap::new();
        for (&u, m) in &b.mats {
            match pivots.get(&u) {
                None => scale_cmat(m, 1.0, mats.entry(u).or_default()),
                Some((rhs, row)) => {
                    scale_cmat(m, *rhs, &mut constant);
                    for &(k, c) in row {
                        scale_cmat(m, -c, mats.entry(k).or_default());
                    }
                }
            }
        }
        let mag = mats
            .values()
            .chain(std::iter::once(&constant))
            .flat_map(|m| m.values())
            .fold(0.0f64, |a, v| a.max(v.norm()));
        let tol = 1e-13 * mag.max(1e-300);
        let clean = |m: &mut CMat| {
            m.retain(|_, v| v.norm() > tol);
            for v in m.values_mut() {
                if v.re.abs() <= tol {
                    v.re = 0.0;
                }
                if v.im.abs() <= tol {
                    v.im = 0.0;
                }
            }
        };
        clean(&mut constant);
        for m in mats.values_mut() {
            clean(m);
        }
        mats.retain(|_, m| !m.is_empty());
        subst_blocks.push((bi, LBlock { dim: b.dim, constant, mats, margin: b.margin.clone() }));
    }

    // Free unknowns in use, in order.
    let mut used: Vec<usize> = subst_blocks.iter().flat_map(|(_, b)| b.mats.keys().copied()).collect();
    used.sort_unstable();
    used.dedup();
    let index: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let mut problem = LmiProblem::new(used.len());
    let mut origin = Vec::new();
    for (bi, b) in subst_blocks {
        // Drop rows that vanish identically.
        let mut live = vec![false; b.dim];
        for m in b.mats.values().chain(std::iter::once(&b.constant)) {
            for &(r, c) in m.keys() {
                live[r] = true;
                live[c] = true;
            }
        }
        let keep: Vec<usize> = (0..b.dim).filter(|&i| live[i]).collect();
        if keep.is_empty() {
            continue;
        }
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &r)| (r, i)).collect();
        let complex = b.mats.values().chain(std::iter::once(&b.constant)).any(|m| m.values().any(|v| v.im != 0.0))
            || b.margin.iter().any(|v| v.im != 0.0);
        let d = keep.len();
        let dd = if complex { 2 * d } else { d };
        let mut lb = LmiBlock::new(dd);
        let put = |lb: &mut LmiBlock, var: Option<usize>, r: usize, c: usize, v: Complex64| {
            let (r, c) = (pos[&r], pos[&c]);
            let mut add = |i: usize, j: usize, x: f64| {
                if x != 0.0 {
                    match var {
                        None => lb.add_constant(i, j, x),
                        Some(k) => lb.add_term(k, i, j, x),
                    }
                }
            };
            add(r, c, v.re);
            if complex {
                add(r + d, c + d, v.re);
                // [[A, -B], [B, A]] with B antisymmetric: entry (c + d, r) is
                // Im(B_cr) = -Im(v).
                if r != c {
                    add(r, c + d, v.im);
                    add(c, r + d, -v.im);
                }
            }
        };
        for (&(r, c), &v) in &b.constant {
            put(&mut lb, None, r, c, v);
        }
        for (&u, m) in &b.mats {
            for (&(r, c), &v) in m {
                put(&mut lb, Some(index[&u]), r, c, v);
            }
        }
        lb.prune();
        let w = b.margin.select_rows(keep.iter()).select_columns(keep.iter());
        let wr = if complex {
            let re = w.map(|v| v.re);
            let im = w.map(|v| v.im);
            let mut out = DMatrix::zeros(2 * d, 2 * d);
            out.view_mut((0, 0), (d, d)).copy_from(&re);
            out.view_mut((d, d), (d, d)).copy_from(&re);
            out.view_mut((0, d), (d, d)).copy_from(&(-&im));
            out.view_mut((d, 0), (d, d)).copy_from(&im);
            out
        } else {
            w.map(|v| v.re)
        };
        let is_identity = wr.iter().enumerate().all(|(k, &v)| v == if k % (dd + 1) == 0 { 1.0 } else { 0.0 });
        if !is_identity {
            let wr = (&wr + wr.transpose()) * 0.5;
            lb = lb.with_margin_matrix(&wr);
        }
        problem.push(lb);
        origin.push(bi);
    }
    Compiled { problem, free: used, pivots, num_unknowns: low.num_unknowns, origin, inconsistent: rref.inconsistent }
}

/// Checks a state for a builder (registers `[n, n]`) and rescales it by a
/// positive factor: the trace when positive, else the Frobenius norm.
pub(crate) fn prepare(rho: &HermitianMatrix) -> Result<(usize, HermitianMatrix, f64), RelaxError> {
    let n = states::square_registers(rho).map_err(RelaxError::State)?;
    let tr = rho.trace();
    let scale = if tr > 0.0 {
        tr
    } else if rho.frobenius_norm() > 0.0 {
        rho.frobenius_norm()
    } else {
        1.0
    };
    if !scale.is_finite() {
        return Err(RelaxError::Trace(tr));
    }
    Ok((n, rho.scale(1.0 / scale), scale))
}
