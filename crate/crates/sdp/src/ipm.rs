//! Primal-dual interior-point method for
//! `max b^T y  s.t.  Z = C - sum_i y_i A_i ⪰ 0` (and its primal
//! `min <C, X>  s.t.  <A_i, X> = b_i, X ⪰ 0`), block-diagonal, dense blocks.

use hermitian_core::par::{self, Exec};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{verdict_for, LmiProblem, ObjectiveReport, ObjectiveStatus, SolveError, SolveOptions, SolveReport, Status};

/// One constraint matrix restricted to a block, stored with both triangles.
#[derive(Clone, Debug)]
struct Con {
    var: usize,
    entries: Vec<(usize, usize, f64)>,
    rows: Vec<usize>,
    fro: f64,
}

#[derive(Clone, Debug)]
struct Block {
    n: usize,
    c: DMatrix<f64>,
    cons: Vec<Con>,
}

#[derive(Clone, Debug)]
struct Sdp {
    m: usize,
    b: DVector<f64>,
    blocks: Vec<Block>,
    /// For each variable, the `(block, con)` pairs it appears in.
    var_cons: Vec<Vec<(usize, usize)>>,
}

fn make_con(var: usize, upper: impl Iterator<Item = (usize, usize, f64)>, scale: f64) -> Con {
    let mut entries = Vec::new();
    for (i, j, v) in upper {
        let v = v * scale;
        if v == 0.0 {
            continue;
        }
        entries.push((i, j, v));
        if i != j {
            entries.push((j, i, v));
        }
    }
    let mut rows: Vec<usize> = entries.iter().map(|e| e.0).collect();
    rows.sort_unstable();
    rows.dedup();
    let fro = entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt();
    Con { var, entries, rows, fro }
}

impl Sdp {
    fn finish(m: usize, b: DVector<f64>, blocks: Vec<Block>) -> Self {
        let mut var_cons = vec![Vec::new(); m];
        for (k, bl) in blocks.iter().enumerate() {
            for (idx, c) in bl.cons.iter().enumerate() {
                var_cons[c.var].push((k, idx));
            }
        }
        Self { m, b, blocks, var_cons }
    }

    fn n_total(&self) -> usize {
        self.blocks.iter().map(|b| b.n).sum()
    }

    fn op_a(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.m);
        for (bl, xk) in self.blocks.iter().zip(x) {
            for c in &bl.cons {
                out[c.var] += c.entries.iter().map(|&(p, q, v)| v * xk[(p, q)]).sum::<f64>();
            }
        }
        out
    }

    fn op_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .map(|bl| {
                let mut out = DMatrix::zeros(bl.n, bl.n);
                for c in &bl.cons {
                    let yv = y[c.var];
                    if yv != 0.0 {
                        for &(p, q, v) in &c.entries {
                            out[(p, q)] += yv * v;
                        }
                    }
                }
                out
            })
            .collect()
    }
}

/// Active variables of an LMI problem, in increasing order, and the inverse map.
fn active_vars(p: &LmiProblem) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut used = vec![false; p.num_vars];
    for b in &p.blocks {
        for (&matno, m) in &b.mats {
            if matno > 0 && !m.is_empty() {
                used[matno - 1] = true;
            }
        }
    }
    let active: Vec<usize> = (0..p.num_vars).filter(|&i| used[i]).collect();
    let mut inv = vec![None; p.num_vars];
    for (k, &i) in active.iter().enumerate() {
        inv[i] = Some(k);
    }
    (active, inv)
}

fn lmi_blocks(p: &LmiProblem, inv: &[Option<usize>]) -> Vec<Block> {
    p.blocks
        .iter()
        .map(|b| {
            let mut c = DMatrix::zeros(b.dim, b.dim);
            let mut cons = Vec::new();
            for (&matno, mat) in &b.mats {
                if matno == 0 {
                    for (&(i, j), &v) in mat {
                        c[(i, j)] += v;
                        if i != j {
                            c[(j, i)] += v;
                        }
                    }
                } else if let Some(var) = inv[matno - 1] {
                    cons.push(make_con(var, mat.iter().map(|(&(i, j), &v)| (i, j, v)), -1.0));
                }
            }
            Block { n: b.dim, c, cons }
        })
        .collect()
}

fn margin_sdp(p: &LmiProblem, inv: &[Option<usize>], m_active: usize, cap: f64) -> Sdp {
    let lam = m_active;
    let mut blocks = lmi_blocks(p, inv);
    for (bl, src) in blocks.iter_mut().zip(&p.blocks) {
        let con = match &src.margin {
            None => make_con(lam, (0..bl.n).map(|i| (i, i, 1.0)), -1.0),
            Some(w) => make_con(lam, w.iter().map(|(&(i, j), &v)| (i, j, v)), -1.0),
        };
        bl.cons.push(con);
    }
    blocks.push(Block {
        n: 1,
        c: DMatrix::from_element(1, 1, cap),
        cons: vec![make_con(lam, std::iter::once((0, 0, 1.0)), -1.0)],
    });
    let mut b = DVector::zeros(m_active + 1);
    b[lam] = -1.0;
    Sdp::finish(m_active + 1, b, blocks)
}

/// NT scaling data of one block.
struct Scaling {
    g: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, z: &DMatrix<f64>) -> Option<Scaling> {
    let l = nalgebra::Cholesky::new(x.clone())?.l();
    let inner = l.transpose() * z * &l;
    let inner = (&inner + inner.transpose()) * 0.5;
    let eig = SymmetricEigen::new(inner);
    if eig.eigenvalues.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let d = eig.eigenvalues.map(f64::sqrt);
    let mut g = l * eig.eigenvectors;
    for (j, mut col) in g.column_iter_mut().enumerate() {
        col /= d[j].sqrt();
    }
    let w = &g * g.transpose();
    Some(Scaling { g, w, d })
}

/// Dense `W A W` for a sparse symmetric `A`, via the rows `A` touches.
fn sandwich(w: &DMatrix<f64>, c: &Con) -> DMatrix<f64> {
    let n = w.nrows();
    let r = c.rows.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &row) in c.rows.iter().enumerate() {
        pos[row] = k;
    }
    // T = A W restricted to rows of A.
    let mut t = DMatrix::zeros(r, n);
    for &(p, q, v) in &c.entries {
        let rp = pos[p];
        for col in 0..n {
            t[(rp, col)] += v * w[(q, col)];
        }
    }
    let wcols = w.select_columns(c.rows.iter());
    wcols * t
}

fn schur(sdp: &Sdp, w: &[DMatrix<f64>], exec: Exec) -> DMatrix<f64> {
    let m = sdp.m;
    let columns: Vec<Vec<(usize, f64)>> = par::map_range(exec, m, |j| {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for &(k, idx) in &sdp.var_cons[j] {
            let bl = &sdp.blocks[k];
            let cj = &bl.cons[idx];
            let pj = sandwich(&w[k], cj);
            for ci in &bl.cons {
                if ci.var <= j {
                    let v: f64 = ci.entries.iter().map(|&(p, q, a)| a * pj[(p, q)]).sum();
                    out.push((ci.var, v));
                }
            }
        }
        out
    });
    let mut mat = DMatrix::zeros(m, m);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col {
            mat[(i, j)] += v;
        }
    }
    for j in 0..m {
        for i in 0..j {
            mat[(j, i)] = mat[(i, j)];
        }
    }
    mat
}

/// Schur-complement matrix `M_ij = sum_k <F_{k,i}, W_k F_{k,j} W_k>` of an LMI
/// problem for given per-block scaling matrices. Exposed for benchmarking.
pub fn assemble_schur(p: &LmiProblem, w: &[DMatrix<f64>], exec: Exec) -> DMatrix<f64> {
    let (active, inv) = active_vars(p);
    let blocks = lmi_blocks(p, &inv);
    let sdp = Sdp::finish(active.len(), DVector::zeros(active.len()), blocks);
    schur(&sdp, w, exec)
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    /// Cholesky of `m + reg I`, refined against `m`.
    Regularized(nalgebra::Cholesky<f64, nalgebra::Dyn>, DMatrix<f64>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: &DMatrix<f64>) -> Option<Self> {
        if let Some(c) = nalgebra::Cholesky::new(m.clone()) {
            return Some(Factor::Chol(c));
        }
        let scale = m.diagonal().iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let mut reg = 1e-14;
        while reg < 1e-6 {
            let mut mm = m.clone();
            for i in 0..mm.nrows() {
                mm[(i, i)] += reg * scale;
            }
            if let Some(c) = nalgebra::Cholesky::new(mm) {
                return Some(Factor::Regularized(c, m.clone()));
            }
            reg *= 100.0;
        }
        let lu = nalgebra::LU::new(m.clone());
        lu.is_invertible().then_some(Factor::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        let out = match self {
            Factor::Chol(c) => c.solve(rhs),
            Factor::Regularized(c, m) => {
                let mut x = c.solve(rhs);
                let mut res = (rhs - m * &x).norm();
                for _ in 0..5 {
                    let step = c.solve(&(rhs - m * &x));
                    let next = &x + step;
                    let r = (rhs - m * &next).norm();
                    if !(r < res) {
                        break;
                    }
                    x = next;
                    res = r;
                }
                x
            }
            Factor::Lu(l) => l.solve(rhs)?,
        };
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}

/// Largest `alpha` with `V + alpha D ⪰ 0` for diagonal `V = diag(d)`.
fn step_length(d: &DVector<f64>, dm: &DMatrix<f64>) -> f64 {
    let n = d.len();
    let s = DMatrix::from_fn(n, n, |i, j| dm[(i, j)] / (d[i] * d[j]).sqrt());
    let s = (&s + s.transpose()) * 0.5;
    let lmin = s.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

struct Direction {
    dy: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dxt: Vec<DMatrix<f64>>,
    dzt: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
struct Iterate {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    z: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
struct Outcome {
    it: Iterate,
    iterations: usize,
    pinf: f64,
    dinf: f64,
    gap: f64,
    pobj: f64,
    dobj: f64,
    status: Status,
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Margin,
    Objective { unbounded: f64 },
}

fn direction(
    sdp: &Sdp,
    sc: &[Scaling],
    fac: &Factor,
    rp: &DVector<f64>,
    rd: &[DMatrix<f64>],
    s: &[DMatrix<f64>],
    exec: Exec,
) -> Option<Direction> {
    let rc: Vec<DMatrix<f64>> = par::map_range(exec, sc.len(), |k| &sc[k].g * &s[k] * sc[k].g.transpose());
    let inner_t: Vec<DMatrix<f64>> = par::map_range(exec, sc.len(), |k| &rc[k] - &sc[k].w * &rd[k] * &sc[k].w);
    let rhs = rp - sdp.op_a(&inner_t);
    let dy = fac.solve(&rhs)?;
    let at = sdp.op_at(&dy);
    let dz: Vec<DMatrix<f64>> = rd.iter().zip(&at).map(|(r, a)| r - a).collect();
    let dx: Vec<DMatrix<f64>> = par::map_range(exec, sc.len(), |k| &rc[k] - &sc[k].w * &dz[k] * &sc[k].w);
    let dzt: Vec<DMatrix<f64>> = par::map_range(exec, sc.len(), |k| {
        let v = sc[k].g.transpose() * &dz[k] * &sc[k].g;
        (&v + v.transpose()) * 0.5
    });
    let dxt: Vec<DMatrix<f64>> = s.iter().zip(&dzt).map(|(a, b)| a - b).collect();
    Some(Direction { dy, dx, dz, dxt, dzt })
}

fn run(sdp: &Sdp, opts: &SolveOptions, mode: Mode) -> Outcome {
    let exec = opts.exec;
    let n_total = sdp.n_total() as f64;
    let norm_b = sdp.b.norm();
    let norm_c = sdp.blocks.iter().map(|b| b.c.norm_squared()).sum::<f64>().sqrt();

    let mut it = {
        let mut x = Vec::new();
        let mut z = Vec::new();
        for bl in &sdp.blocks {
            let nk = bl.n as f64;
            let mut xi: f64 = 10f64.max(nk.sqrt());
            let mut eta: f64 = 10f64.max(nk.sqrt()).max(bl.c.norm());
            for c in &bl.cons {
                xi = xi.max(nk.sqrt() * (1.0 + sdp.b[c.var].abs()) / (1.0 + c.fro));
                eta = eta.max(c.fro);
            }
            x.push(DMatrix::identity(bl.n, bl.n) * xi);
            z.push(DMatrix::identity(bl.n, bl.n) * eta);
        }
        Iterate { x, y: DVector::zeros(sdp.m), z }
    };

    let mut best: Option<(f64, Outcome)> = None;
    let mut last_alpha = (1.0f64, 1.0f64);
    let mut stall = 0;

    for iter in 0..=opts.max_iter {
        let aty = sdp.op_at(&it.y);
        let rp = &sdp.b - sdp.op_a(&it.x);
        let rd: Vec<DMatrix<f64>> = sdp.blocks.iter().zip(&it.z).zip(&aty).map(|((bl, z), a)| &bl.c - z - a).collect();
        let pobj: f64 = sdp.blocks.iter().zip(&it.x).map(|(bl, x)| inner(&bl.c, x)).sum();
        let dobj = sdp.b.dot(&it.y);
        let pinf = rp.norm() / (1.0 + norm_b);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + norm_c);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let xz: f64 = it.x.iter().zip(&it.z).map(|(x, z)| inner(x, z)).sum();
        let mu = xz / n_total;

        let merit = pinf.max(dinf).max(gap);
        let snapshot = |status| Outcome { it: it.clone(), iterations: iter, pinf, dinf, gap, pobj, dobj, status };
        if best.as_ref().is_none_or(|(b, _)| merit <= *b) {
            best = Some((merit, snapshot(Status::IterationLimit)));
        }
        if opts.verbosity > 1 {
            eprintln!(
                "iter {iter:3} pobj {pobj:+.10e} dobj {dobj:+.10e} pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e}"
            );
        }
        if pinf < opts.gap_tol && dinf < opts.gap_tol && gap < opts.gap_tol {
            return snapshot(Status::Converged);
        }
        if let Mode::Objective { unbounded } = mode {
            if it.y.amax() > unbounded && dinf < 1e-6 {
                return snapshot(Status::Certified);
            }
        }
        if iter == opts.max_iter || stall >= 8 {
            break;
        }

        let sc: Option<Vec<Scaling>> =
            par::map_range(exec, sdp.blocks.len(), |k| nt_scaling(&it.x[k], &it.z[k])).into_iter().collect();
        let Some(sc) = sc else { break };
        let w: Vec<DMatrix<f64>> = sc.iter().map(|s| s.w.clone()).collect();
        let mm = schur(sdp, &w, exec);
        let Some(fac) = Factor::new(&mm) else { break };

        // Predictor.
        let s_aff: Vec<DMatrix<f64>> = sc.iter().map(|s| DMatrix::from_diagonal(&(-&s.d))).collect();
        let Some(aff) = direction(sdp, &sc, &fac, &rp, &rd, &s_aff, exec) else { break };
        let ap = sc.iter().zip(&aff.dxt).map(|(s, d)| step_length(&s.d, d)).fold(f64::INFINITY, f64::min).min(1.0);
        let ad = sc.iter().zip(&aff.dzt).map(|(s, d)| step_length(&s.d, d)).fold(f64::INFINITY, f64::min).min(1.0);
        let xz_aff: f64 =
            (0..sdp.blocks.len()).map(|k| inner(&(&it.x[k] + &aff.dx[k] * ap), &(&it.z[k] + &aff.dz[k] * ad))).sum();
        let ratio = (xz_aff / xz).clamp(0.0, 1.0);
        let expon = if mu > 1e-6 { (3.0 * ap.min(ad).powi(2)).max(1.0) } else { 3.0 };
        let sigma = ratio.powf(expon).clamp(0.0, 1.0);

        // Corrector.
        let s_cor: Vec<DMatrix<f64>> = sc
            .iter()
            .zip(aff.dxt.iter().zip(&aff.dzt))
            .map(|(s, (dx, dz))| {
                let n = s.d.len();
                let prod = dx * dz;
                DMatrix::from_fn(n, n, |i, j| {
                    let r =
                        if i == j { sigma * mu - s.d[i] * s.d[i] } else { 0.0 } - 0.5 * (prod[(i, j)] + prod[(j, i)]);
                    2.0 * r / (s.d[i] + s.d[j])
                })
            })
            .collect();
        let Some(dir) = direction(sdp, &sc, &fac, &rp, &rd, &s_cor, exec) else { break };
        let amax_p = sc.iter().zip(&dir.dxt).map(|(s, d)| step_length(&s.d, d)).fold(f64::INFINITY, f64::min);
        let amax_d = sc.iter().zip(&dir.dzt).map(|(s, d)| step_length(&s.d, d)).fold(f64::INFINITY, f64::min);
        let tau = 0.9 + 0.09 * last_alpha.0.min(last_alpha.1);
        let ap = (tau * amax_p).min(1.0);
        let ad = (tau * amax_d).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || ap < 1e-12 && ad < 1e-12 {
            break;
        }
        if ap.min(ad) < 1e-4 {
            stall += 1;
        } else {
            stall = 0;
        }
        last_alpha = (ap, ad);
        for k in 0..sdp.blocks.len() {
            let nx = &it.x[k] + &dir.dx[k] * ap;
            it.x[k] = (&nx + nx.transpose()) * 0.5;
            let nz = &it.z[k] + &dir.dz[k] * ad;
            it.z[k] = (&nz + nz.transpose()) * 0.5;
        }
        it.y += &dir.dy * ad;
    }
    let (_, mut out) = best.expect("at least one iterate");
    out.status = Status::IterationLimit;
    out
}

/// Smallest `lambda ≥ -cap` with `B_k(y) + lambda W_k ⪰ 0` for every block, and
/// the per-block minimum eigenvalues of `B_k(y)`.
pub fn certified_margin(p: &LmiProblem, y: &[f64], cap: f64) -> (f64, Vec<f64>) {
    let mut lam = -cap;
    let mut mins = Vec::with_capacity(p.blocks.len());
    for b in &p.blocks {
        let mut m = b.evaluate(y);
        mins.push(m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min));
        if b.margin.is_some() {
            // L^{-1} B L^{-T} for W = L L^T.
            let Some(ch) = nalgebra::Cholesky::new(b.margin_matrix()) else {
                return (f64::INFINITY, mins);
            };
            let l = ch.l();
            let left = l.solve_lower_triangular(&m).expect("nonsingular factor");
            let both = l.solve_lower_triangular(&left.transpose()).expect("nonsingular factor");
            m = (&both + both.transpose()) * 0.5;
        }
        let lmin = m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        lam = lam.max(-lmin);
    }
    (lam, mins)
}

fn check_finite(p: &LmiProblem) -> Result<(), SolveError> {
    let ok = p.blocks.iter().all(|b| {
        b.mats.values().all(|m| m.values().all(|v| v.is_finite()))
            && b.margin.as_ref().is_none_or(|w| w.values().all(|v| v.is_finite()))
    });
    if ok {
        Ok(())
    } else {
        Err(SolveError::NonFinite)
    }
}

/// Margin solve. `Feasible` when the margin is at most `-tol_feas`,
/// `Infeasible` when at least `tol_feas`, `Marginal` in between.
pub fn solve_feasibility(p: &LmiProblem, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    check_finite(p)?;
    let (active, inv) = active_vars(p);
    if active.is_empty() {
        // Nothing to optimize: the margin is read off the eigenvalues.
        let y = vec![0.0; p.num_vars];
        let (margin, block_min_eigs) = certified_margin(p, &y, opts.lambda_cap);
        return Ok(SolveReport {
            verdict: verdict_for(margin, opts.tol_feas),
            margin,
            margin_lower: margin,
            iterations: 0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            gap: 0.0,
            block_min_eigs,
            status: Status::Certified,
            y,
        });
    }
    let sdp = margin_sdp(p, &inv, active.len(), opts.lambda_cap);
    let out = run(&sdp, opts, Mode::Margin);
    let mut y = vec![0.0; p.num_vars];
    for (k, &i) in active.iter().enumerate() {
        y[i] = out.it.y[k];
    }
    let (margin, block_min_eigs) = certified_margin(p, &y, opts.lambda_cap);
    let margin_lower = -out.pobj;
    let verdict = verdict_for(margin, opts.tol_feas);
    let mut report = SolveReport {
        verdict,
        margin,
        margin_lower,
        iterations: out.iterations,
        primal_residual: out.pinf,
        dual_residual: out.dinf,
        gap: out.gap,
        block_min_eigs,
        status: out.status,
        y,
    };
    if out.status == Status::Converged {
        return Ok(report);
    }
    // Not converged: keep the answer only when a certificate decides it.
    if margin <= -opts.tol_feas {
        report.status = Status::Certified;
        return Ok(report);
    }
    if out.pinf < 1e-7 && margin_lower >= opts.tol_feas {
        report.status = Status::Certified;
        report.verdict = verdict_for(margin_lower, opts.tol_feas);
        return Ok(report);
    }
    report.status = if out.iterations >= opts.max_iter { Status::IterationLimit } else { Status::NumericalFailure };
    Err(SolveError::NumericalFailure(Box::new(report)))
}

/// Minimizes `c^T y` subject to `B_k(y) ⪰ 0`.
pub fn solve_objective(p: &LmiProblem, c: &[f64], opts: &SolveOptions) -> Result<ObjectiveReport, SolveError> {
    check_finite(p)?;
    if c.len() != p.num_vars {
        return Err(SolveError::ObjectiveLength { got: c.len(), want: p.num_vars });
    }
    let (active, inv) = active_vars(p);
    let blocks = lmi_blocks(p, &inv);
    let b = DVector::from_iterator(active.len(), active.iter().map(|&i| -c[i]));
    let sdp = Sdp::finish(active.len(), b, blocks);
    let free_direction = (0..p.num_vars).any(|i| inv[i].is_none() && c[i] != 0.0);
    let out = run(&sdp, opts, Mode::Objective { unbounded: opts.unbounded_threshold });
    let mut y = vec![0.0; p.num_vars];
    for (k, &i) in active.iter().enumerate() {
        y[i] = out.it.y[k];
    }
    let mut report = ObjectiveReport {
        status: ObjectiveStatus::Optimal,
        value: -out.dobj,
        lower_bound: -out.pobj,
        iterations: out.iterations,
        primal_residual: out.pinf,
        dual_residual: out.dinf,
        gap: out.gap,
        y,
    };
    if free_direction || out.status == Status::Certified {
        report.status = ObjectiveStatus::Unbounded;
        report.value = f64::NEG_INFINITY;
        return Ok(report);
    }
    match out.status {
        Status::Converged => Ok(report),
        _ => {
            let xnorm: f64 = out.it.x.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if out.pinf < 1e-7 && xnorm > 1e8 && out.dinf > 1e-6 {
                report.status = ObjectiveStatus::Infeasible;
                report.value = f64::INFINITY;
                Ok(report)
            } else {
                Err(SolveError::ObjectiveFailure(Box::new(report)))
            }
        }
    }
}
