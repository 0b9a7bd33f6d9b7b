//! Dense affine LMIs with linear equalities.
//!
//! Equalities are eliminated through an SVD null-space basis. When the margin
//! solve ends on the boundary, the near-kernel of the optimal blocks is
//! imposed as new equalities and the problem is restricted to the complementary
//! face, so boundary-feasible problems can still be certified.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use sdp::{solve_feasibility, LmiBlock, LmiProblem, SolveError, SolveOptions, Status, Verdict};

/// `c + sum_k y_k f[k]`, all symmetric.
#[derive(Clone, Debug)]
pub(crate) struct ABlock {
    pub c: DMatrix<f64>,
    pub f: Vec<DMatrix<f64>>,
}

impl ABlock {
    pub fn zero(dim: usize, nvars: usize) -> Self {
        Self { c: DMatrix::zeros(dim, dim), f: vec![DMatrix::zeros(dim, dim); nvars] }
    }

    fn eval(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = self.c.clone();
        for (k, fk) in self.f.iter().enumerate() {
            if y[k] != 0.0 {
                m += fk * y[k];
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub(crate) struct AffineLmi {
    pub nvars: usize,
    pub blocks: Vec<ABlock>,
    /// Rows `(a, b)` meaning `a . y = b`.
    pub eqs: Vec<(DVector<f64>, f64)>,
}

/// Outcome of [`AffineLmi::solve`].
#[derive(Clone, Debug)]
pub(crate) struct AffineOutcome {
    pub verdict: Verdict,
    pub margin: f64,
    /// Margin on the reduced face, when facial reduction ran.
    pub face_margin: Option<f64>,
    pub reductions: usize,
    pub status: Status,
    pub iterations: usize,
    pub block_sizes: Vec<usize>,
    /// Original variables at the returned point.
    pub y: Vec<f64>,
}

/// Affine map `y = y0 + t w`.
struct Param {
    y0: DVector<f64>,
    t: DMatrix<f64>,
}

/// Particular solution and null-space basis of `a y = b`, or the residual
/// when the system is inconsistent.
fn solve_equalities(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), f64> {
    let n = a.ncols();
    if a.nrows() == 0 {
        return Ok((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    if n == 0 {
        let res = b.amax();
        return if res > 1e-8 { Err(res) } else { Ok((DVector::zeros(0), DMatrix::zeros(0, 0))) };
    }
    // Row-scale so the rank threshold is relative.
    let mut a = a.clone();
    let mut b = b.clone();
    for i in 0..a.nrows() {
        let s = a.row(i).amax().max(b[i].abs());
        if s > 0.0 {
            a.row_mut(i).scale_mut(1.0 / s);
            b[i] /= s;
        }
    }
    // SVD of a^T gives the row space of a in its left factor.
    let svd = a.transpose().svd(true, true);
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    // y0 = a^+ b.
    let mut y0 = DVector::zeros(n);
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        if s > tol {
            let coef = v_t.row(k).dot(&b.transpose()) / s;
            y0 += u.column(k) * coef;
        }
    }
    let res = (&a * &y0 - &b).amax();
    if res > 1e-8 {
        return Err(res);
    }
    // The null space is the orthogonal complement of the row space.
    let mut null = Vec::new();
    if rank < n {
        let mut comp = DMatrix::identity(n, n);
        for k in 0..rank {
            let c = u.column(k);
            comp -= c * c.transpose();
        }
        let e = SymmetricEigen::new(comp);
        for k in 0..n {
            if e.eigenvalues[k] > 0.5 {
                null.push(e.eigenvectors.column(k).into_owned());
            }
        }
    }
    let t = if null.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&null) };
    Ok((y0, t))
}

impl AffineLmi {
    pub fn new(nvars: usize) -> Self {
        Self { nvars, blocks: Vec::new(), eqs: Vec::new() }
    }

    pub fn equality(&mut self, terms: &[(usize, f64)], rhs: f64) {
        let mut a = DVector::zeros(self.nvars);
        for &(k, v) in terms {
            a[k] += v;
        }
        self.eqs.push((a, rhs));
    }

    /// Blocks in the reduced variables `w`, with `y = p.y0 + p.t w`.
    fn reparametrize(blocks: &[ABlock], p: &Param) -> Vec<ABlock> {
        blocks
            .iter()
            .map(|b| {
                let mut c = b.c.clone();
                for (k, fk) in b.f.iter().enumerate() {
                    if p.y0[k] != 0.0 {
                        c += fk * p.y0[k];
                    }
                }
                let f = (0..p.t.ncols())
                    .map(|j| {
                        let mut m = DMatrix::zeros(b.c.nrows(), b.c.ncols());
                        for (k, fk) in b.f.iter().enumerate() {
                            let s = p.t[(k, j)];
                            if s != 0.0 {
                                m += fk * s;
                            }
                        }
                        m
                    })
                    .collect();
                ABlock { c, f }
            })
            .collect()
    }

    fn to_problem(blocks: &[ABlock], nvars: usize) -> LmiProblem {
        let mut p = LmiProblem::new(nvars);
        for b in blocks {
            let d = b.c.nrows();
            let scale = b.f.iter().fold(b.c.amax(), |a, m| a.max(m.amax())).max(1e-300);
            let mut lb = LmiBlock::new(d);
            for i in 0..d {
                for j in i..d {
                    if b.c[(i, j)].abs() > 1e-14 * scale {
                        lb.add_constant(i, j, b.c[(i, j)]);
                    }
                    for (k, fk) in b.f.iter().enumerate() {
                        if fk[(i, j)].abs() > 1e-14 * scale {
                            lb.add_term(k, i, j, fk[(i, j)]);
                        }
                    }
                }
            }
            p.push(lb);
        }
        p
    }

    /// Margin solve with up to `max_reductions` facial-reduction rounds.
    pub fn solve(&self, opts: &SolveOptions, max_reductions: usize) -> Result<AffineOutcome, SolveError> {
        let (a, b) = self.eq_system();
        let (y0, t) = match solve_equalities(&a, &b) {
            Ok(x) => x,
            Err(res) => {
                return Ok(AffineOutcome {
                    verdict: Verdict::Infeasible,
                    margin: res,
                    face_margin: None,
                    reductions: 0,
                    status: Status::Certified,
                    iterations: 0,
                    block_sizes: self.blocks.iter().map(|b| b.c.nrows()).collect(),
                    y: Vec::new(),
                })
            }
        };
        let mut param = Param { y0, t };
        let mut blocks = Self::reparametrize(&self.blocks, &param);
        let (mut out, w) = Self::margin(&blocks, &param, opts)?;
        let mut w = w;
        let mut rounds = 0;
        while out.verdict == Verdict::Marginal && rounds < max_reductions {
            let Some((next_param, next_blocks)) = Self::reduce(&blocks, &param, &w) else {
                break;
            };
            rounds += 1;
            let (face, fw) = Self::margin(&next_blocks, &next_param, opts)?;
            out.face_margin = Some(face.margin);
            out.reductions = rounds;
            out.iterations += face.iterations;
            if face.verdict == Verdict::Feasible {
                // A strictly feasible point of the face is a certificate.
                out.verdict = Verdict::Feasible;
                out.status = face.status;
                out.y = face.y;
                out.block_sizes = face.block_sizes;
                break;
            }
            if face.verdict == Verdict::Infeasible {
                // The kernel guess cut off the feasible set; keep the
                // boundary verdict.
                break;
            }
            param = next_param;
            blocks = next_blocks;
            w = fw;
        }
        Ok(out)
    }

    fn eq_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let m = self.eqs.len();
        let mut a = DMatrix::zeros(m, self.nvars);
        let mut b = DVector::zeros(m);
        for (i, (row, rhs)) in self.eqs.iter().enumerate() {
            a.set_row(i, &row.transpose());
            b[i] = *rhs;
        }
        (a, b)
    }

    fn margin(blocks: &[ABlock], param: &Param, opts: &SolveOptions) -> Result<(AffineOutcome, Vec<f64>), SolveError> {
        let nw = param.t.ncols();
        let block_sizes: Vec<usize> = blocks.iter().map(|b| b.c.nrows()).collect();
        let (verdict, margin, status, iterations, w) = if blocks.is_empty() {
            (Verdict::Feasible, -opts.lambda_cap, Status::Certified, 0, vec![0.0; nw])
        } else {
            let r = solve_feasibility(&Self::to_problem(blocks, nw), opts)?;
            (r.verdict, r.margin, r.status, r.iterations, r.y)
        };
        let y = &param.y0 + &param.t * DVector::from_column_slice(&w);
        let out = AffineOutcome {
            verdict,
            margin,
            face_margin: None,
            reductions: 0,
            status,
            iterations,
            block_sizes,
            y: y.iter().copied().collect(),
        };
        Ok((out, w))
    }

    /// Restricts to the face exposed by the near-kernel of the blocks at `w`.
    fn reduce(blocks: &[ABlock], param: &Param, w: &[f64]) -> Option<(Param, Vec<ABlock>)> {
        let nw = param.t.ncols();
        let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
        let mut ranges = Vec::with_capacity(blocks.len());
        let mut any = false;
        let eigs: Vec<SymmetricEigen<f64, nalgebra::Dyn>> =
            blocks.iter().map(|b| SymmetricEigen::new(b.eval(w))).collect();
        // One scale for all blocks: small blocks can sit entirely on the boundary.
        let top = eigs.iter().flat_map(|e| e.eigenvalues.iter()).fold(0.0f64, |a, &v| a.max(v.abs()));
        let cut = 1e-5 * top.max(1e-12);
        for (b, e) in blocks.iter().zip(&eigs) {
            let d = b.c.nrows();
            let (ker, ran): (Vec<usize>, Vec<usize>) = (0..d).partition(|&k| e.eigenvalues[k] <= cut);
            if !ker.is_empty() {
                any = true;
            }
            for &k in &ker {
                let v = e.eigenvectors.column(k);
                // (C + sum w_j F_j) v = 0, one row per coordinate.
                let cv = &b.c * v;
                let fv: Vec<DVector<f64>> = b.f.iter().map(|f| f * v).collect();
                for i in 0..d {
                    let row = DVector::from_iterator(nw, fv.iter().map(|x| x[i]));
                    rows.push((row, -cv[i]));
                }
            }
            let q: Vec<DVector<f64>> = ran.iter().map(|&k| e.eigenvectors.column(k).into_owned()).collect();
            ranges.push(q);
        }
        if !any {
            return None;
        }
        let mut a = DMatrix::zeros(rows.len(), nw);
        let mut rhs = DVector::zeros(rows.len());
        for (i, (r, v)) in rows.iter().enumerate() {
            a.set_row(i, &r.transpose());
            rhs[i] = *v;
        }
        let (z0, t) = solve_equalities(&a, &rhs).ok()?;
        let inner = Param { y0: z0, t };
        let reduced: Vec<ABlock> = Self::reparametrize(blocks, &inner)
            .into_iter()
            .zip(&ranges)
            .filter(|(_, q)| !q.is_empty())
            .map(|(b, q)| {
                let q = DMatrix::from_columns(q);
                let sym = |m: &DMatrix<f64>| {
                    let r = q.transpose() * m * &q;
                    (&r + r.transpose()) * 0.5
                };
                ABlock { c: sym(&b.c), f: b.f.iter().map(sym).collect() }
            })
            .collect();
        let composed = Param { y0: &param.y0 + &param.t * &inner.y0, t: &param.t * &inner.t };
        Some((composed, reduced))
    }
}
