//! Reconstruction and independent checking of certificates.

use hermitian_core::{psd_accepts, Complex64, HermitianMatrix};
use nalgebra::{DMatrix, DVector};
use patterns::{sequences, ExponentVec, MomentKey};
use serde::Serialize;

use crate::model::{DpsModel, Hierarchy, VarKey};

/// Result of [`verify_certificate`]; `violations` is empty when every check
/// passes.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub bose_deviation: f64,
    /// Smallest eigenvalue of each checked partial transpose, by depth.
    pub min_eigenvalues: Vec<f64>,
    pub trace_error: f64,
    pub trace_tol: f64,
    pub kernel_vectors: usize,
    pub kernel_residual: f64,
    pub violations: Vec<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn counts(n: usize, xs: &[usize]) -> ExponentVec {
    let mut v = vec![0u16; n];
    for &x in xs {
        v[x] += 1;
    }
    ExponentVec(v)
}

/// The extension described by model variable values, rescaled to the
/// original state's trace.
pub fn reconstruct(model: &DpsModel, values: &[Complex64]) -> HermitianMatrix {
    let (n, t) = (model.n, model.t);
    let seqs: Vec<Vec<usize>> = sequences(n, t + 1).collect();
    let d = seqs.len();
    let mut m = DMatrix::<Complex64>::zeros(d, d);
    for (r, x) in seqs.iter().enumerate() {
        for (c, y) in seqs.iter().enumerate().skip(r) {
            let key = match model.hierarchy {
                Hierarchy::Dps => VarKey::Moment(MomentKey {
                    gamma: ExponentVec::unit(n, x[0]),
                    gamma_p: ExponentVec::unit(n, y[0]),
                    delta: counts(n, &x[1..]),
                    delta_p: counts(n, &y[1..]),
                }),
                Hierarchy::Bose => VarKey::Bose { delta: counts(n, x), delta_p: counts(n, y) },
            };
            let v = model.key_value(values, &key) * model.scale;
            m[(r, c)] = v;
            m[(c, r)] = v.conj();
        }
    }
    for i in 0..d {
        m[(i, i)].im = 0.0;
    }
    HermitianMatrix::new(m, vec![n; t + 1]).expect("Hermitian by construction")
}

/// Checks the solution of `model` against `rho`.
pub fn verify_certificate(rho: &HermitianMatrix, model: &DpsModel, values: &[Complex64]) -> CertificateReport {
    if values.len() != model.vars.len() {
        return CertificateReport {
            bose_deviation: f64::NAN,
            min_eigenvalues: Vec::new(),
            trace_error: f64::NAN,
            trace_tol: 0.0,
            kernel_vectors: 0,
            kernel_residual: f64::NAN,
            violations: vec![format!("solution has {} values, model has {} variables", values.len(), model.vars.len())],
        };
    }
    verify_tensor_certificate(rho, model.t, model.hierarchy, &reconstruct(model, values))
}

/// Checks a tensor certificate on registers `[n; t + 1]`: symmetry of the
/// extended registers, PSD of the partial transposes, partial-trace
/// recovery, and propagation of the kernels of `rho` and `rho^{T_B}`.
pub fn verify_tensor_certificate(
    rho: &HermitianMatrix,
    t: usize,
    hierarchy: Hierarchy,
    cert: &HermitianMatrix,
) -> CertificateReport {
    let n = rho.registers()[0];
    let mut violations = Vec::new();
    let scale = 1.0 + rho.max_abs();
    let seqs: Vec<Vec<usize>> = sequences(n, t + 1).collect();
    let index = |s: &[usize]| s.iter().fold(0, |a, &x| a * n + x);

    // Symmetry: invariance of rows under adjacent swaps of symmetric registers.
    let first = if hierarchy == Hierarchy::Bose { 0 } else { 1 };
    let mut bose: f64 = 0.0;
    for k in first..t {
        for x in &seqs {
            let mut sx = x.clone();
            sx.swap(k, k + 1);
            let (a, b) = (index(x), index(&sx));
            for c in 0..cert.dim() {
                bose = bose.max((cert.get(a, c) - cert.get(b, c)).norm());
            }
        }
    }
    if bose > 1e-8 * scale {
        violations.push(format!("not symmetric in the extended registers (deviation {bose:e})"));
    }

    let max_s = if hierarchy == Hierarchy::Bose { t.div_ceil(2) } else { t };
    let mut transposes = Vec::new();
    let mut min_eigs = Vec::new();
    for s in 0..=max_s {
        let regs: Vec<usize> = (1..=s).collect();
        let pt = cert.partial_transpose(&regs).expect("registers present");
        let e = pt.min_eigenvalue();
        if !psd_accepts(e, pt.frobenius_norm()) {
            violations.push(format!("partial transpose on {s} registers has eigenvalue {e:e}"));
        }
        min_eigs.push(e);
        transposes.push(pt);
    }

    let traced: Vec<usize> = (2..=t).collect();
    let marginal = cert.partial_trace(&traced).expect("registers present");
    let trace_error = marginal.max_abs_diff(rho);
    let trace_tol = 1e-6 * scale;
    if trace_error > trace_tol {
        violations.push(format!("partial trace differs from the state by {trace_error:e}"));
    }

    let tol = 1e-9 * rho.trace().abs().max(1e-300);
    let k_rho = if rho.min_eigenvalue() >= -tol { rho.kernel(tol) } else { Vec::new() };
    let tb = rho.partial_transpose(&[1]).expect("bipartite");
    let k_tb = if tb.min_eigenvalue() >= -tol { tb.kernel(tol) } else { Vec::new() };
    let mut kernel_vectors = 0;
    let mut kernel_residual: f64 = 0.0;
    let d = cert.dim();
    let mut apply = |pt: &HermitianMatrix, w: &DVector<Complex64>, reg: usize| {
        for rest in sequences(n, t - 1) {
            let mut v = DVector::<Complex64>::zeros(d);
            for x in &seqs {
                let others: Vec<usize> = (1..=t).filter(|&r| r != reg).map(|r| x[r]).collect();
                if others == rest {
                    v[index(x)] = w[x[0] * n + x[reg]];
                }
            }
            let r = (pt.matrix() * &v).norm() / v.norm().max(1e-300);
            kernel_vectors += 1;
            kernel_residual = kernel_residual.max(r);
        }
    };
    for (s, pt) in transposes.iter().enumerate() {
        if s < t {
            for w in &k_rho {
                apply(pt, w, t);
            }
        }
        if s >= 1 {
            for w in &k_tb {
                apply(pt, w, 1);
            }
        }
    }
    if kernel_residual > 1e-6 * scale {
        violations.push(format!("kernel propagation fails (residual {kernel_residual:e})"));
    }

    CertificateReport {
        bose_deviation: bose,
        min_eigenvalues: min_eigs,
        trace_error,
        trace_tol,
        kernel_vectors,
        kernel_residual,
        violations,
    }
}
