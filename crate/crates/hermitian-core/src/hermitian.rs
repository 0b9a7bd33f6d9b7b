use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::real::RealSymmetric;
use crate::registers::RegisterShape;
use crate::{psd_accepts, Error, Result, HERMITIAN_TOL};

/// Dense complex Hermitian matrix with optional tensor-register metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    registers: Vec<usize>,
    m: DMatrix<Complex64>,
}

fn check_registers(dim: usize, registers: &[usize]) -> Result<()> {
    if !registers.is_empty() && registers.iter().product::<usize>() != dim {
        return Err(Error::RegisterMismatch { dim, registers: registers.to_vec() });
    }
    if registers.contains(&0) {
        return Err(Error::RegisterMismatch { dim, registers: registers.to_vec() });
    }
    Ok(())
}

impl HermitianMatrix {
    /// Builds a Hermitian matrix, rejecting inputs farther than
    /// [`HERMITIAN_TOL`] from Hermitian and symmetrizing the rest.
    pub fn new(m: DMatrix<Complex64>, registers: Vec<usize>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        check_registers(m.nrows(), &registers)?;
        let dev = hermitian_deviation(&m);
        if !(dev <= HERMITIAN_TOL) {
            return Err(Error::NotHermitian(dev));
        }
        let adj = m.adjoint();
        let m = (m + adj).map(|z| z * 0.5);
        Ok(Self { registers, m })
    }

    /// Builds from a real matrix, which must be symmetric within tolerance.
    pub fn from_real(m: &DMatrix<f64>, registers: Vec<usize>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)), registers)
    }

    /// Builds from an entry function; the result is symmetrized.
    pub fn from_fn<F>(dim: usize, registers: Vec<usize>, f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Complex64,
    {
        Self::new(DMatrix::from_fn(dim, dim, f), registers)
    }

    pub fn zeros(dim: usize, registers: Vec<usize>) -> Result<Self> {
        check_registers(dim, &registers)?;
        Ok(Self { registers, m: DMatrix::zeros(dim, dim) })
    }

    pub fn identity(dim: usize, registers: Vec<usize>) -> Result<Self> {
        check_registers(dim, &registers)?;
        Ok(Self { registers, m: DMatrix::identity(dim, dim) })
    }

    /// Rank-one projector `v v*`.
    pub fn outer(v: &[Complex64], registers: Vec<usize>) -> Result<Self> {
        let d = v.len();
        check_registers(d, &registers)?;
        let m = DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
        Ok(Self { registers, m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn registers(&self) -> &[usize] {
        &self.registers
    }

    /// Replaces the register metadata.
    pub fn with_registers(mut self, registers: Vec<usize>) -> Result<Self> {
        check_registers(self.dim(), &registers)?;
        self.registers = registers;
        Ok(self)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Trace inner product `Tr(self* other)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { registers: self.registers.clone(), m: self.m.map(|z| z * s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { registers: self.registers.clone(), m: &self.m + &other.m }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Self { registers: self.registers.clone(), m: &self.m - &other.m }
    }

    /// True when every imaginary part is at most `tol` in modulus.
    pub fn is_real(&self, tol: f64) -> bool {
        self.m.iter().all(|z| z.im.abs() <= tol)
    }

    /// Real part as a real matrix.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }

    /// Tensor product with registers concatenated.
    pub fn kron(&self, other: &Self) -> Self {
        let mut registers = self.registers.clone();
        registers.extend_from_slice(&other.registers);
        Self { registers, m: self.m.kronecker(&other.m) }
    }

    fn shape(&self) -> Result<RegisterShape> {
        if self.registers.is_empty() {
            return Err(Error::MissingRegisters);
        }
        Ok(RegisterShape::new(&self.registers))
    }

    /// Traces out the registers listed in `traced`.
    pub fn partial_trace(&self, traced: &[usize]) -> Result<Self> {
        let shape = self.shape()?;
        let mask = shape.mask(traced)?;
        let kept_dims: Vec<usize> = shape.dims().iter().zip(&mask).filter(|(_, &t)| !t).map(|(&d, _)| d).collect();
        let traced_dims: Vec<usize> = shape.dims().iter().zip(&mask).filter(|(_, &t)| t).map(|(&d, _)| d).collect();
        let kept = RegisterShape::new(&kept_dims);
        let tr = RegisterShape::new(&traced_dims);
        let (dk, dt) = (kept.size(), tr.size());
        let k = shape.len();

        let mut kd = vec![0; kept.len()];
        let mut td = vec![0; tr.len()];
        let mut full = vec![0; k];
        let join = |kd: &[usize], td: &[usize], full: &mut [usize]| {
            let (mut a, mut b) = (0, 0);
            for r in 0..k {
                if mask[r] {
                    full[r] = td[b];
                    b += 1;
                } else {
                    full[r] = kd[a];
                    a += 1;
                }
            }
        };
        // Flat indices of every (kept, traced) combination.
        let mut index = vec![0usize; dk * dt];
        for x in 0..dk {
            kept.digits(x, &mut kd);
            for y in 0..dt {
                tr.digits(y, &mut td);
                join(&kd, &td, &mut full);
                index[x * dt + y] = shape.index(&full);
            }
        }
        let mut out = DMatrix::zeros(dk, dk);
        for r in 0..dk {
            for c in 0..dk {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..dt {
                    acc += self.m[(index[r * dt + y], index[c * dt + y])];
                }
                out[(r, c)] = acc;
            }
        }
        let registers = if kept_dims.is_empty() { vec![1] } else { kept_dims };
        Ok(Self { registers, m: out })
    }

    /// Partial transpose on the registers listed in `transposed`: the digits of
    /// those registers are exchanged between row and column index.
    pub fn partial_transpose(&self, transposed: &[usize]) -> Result<Self> {
        let shape = self.shape()?;
        let mask = shape.mask(transposed)?;
        let d = self.dim();
        let k = shape.len();
        let mut rd = vec![0; k];
        let mut cd = vec![0; k];
        let mut out = DMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                shape.digits(r, &mut rd);
                shape.digits(c, &mut cd);
                for a in 0..k {
                    if mask[a] {
                        std::mem::swap(&mut rd[a], &mut cd[a]);
                    }
                }
                out[(r, c)] = self.m[(shape.index(&rd), shape.index(&cd))];
            }
        }
        Ok(Self { registers: self.registers.clone(), m: out })
    }

    /// Real symmetric embedding `[[Re M, -Im M], [Im M, Re M]]`.
    pub fn real_embedding(&self) -> RealSymmetric {
        let d = self.dim();
        let e = DMatrix::from_fn(2 * d, 2 * d, |i, j| {
            let z = self.m[(i % d, j % d)];
            match (i < d, j < d) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        RealSymmetric::from_symmetric_unchecked(e)
    }

    /// Eigenvalues in ascending order.
    ///
    /// Real inputs go straight to the real symmetric solver; complex inputs are
    /// lowered through the real embedding and every other eigenvalue is kept.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        if self.is_real(0.0) {
            let mut ev: Vec<f64> = SymmetricEigen::new(self.real_part()).eigenvalues.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            return ev;
        }
        let full = self.real_embedding().eigenvalues();
        full.into_iter().step_by(2).collect()
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Full eigendecomposition: ascending eigenvalues and unit eigenvectors as
    /// matrix columns.
    pub fn eigh(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    /// Orthonormal basis of the eigenspace with eigenvalues at most `tol`.
    pub fn kernel(&self, tol: f64) -> Vec<DVector<Complex64>> {
        let (values, vectors) = self.eigh();
        values.iter().enumerate().filter(|(_, &v)| v <= tol).map(|(c, _)| vectors.column(c).into_owned()).collect()
    }

    /// PSD test under the repo-wide threshold convention.
    pub fn is_psd(&self) -> bool {
        psd_accepts(self.min_eigenvalue(), self.frobenius_norm())
    }

    pub fn to_json(&self) -> HermitianJson {
        let d = self.dim();
        let re = (0..d).map(|i| (0..d).map(|j| self.m[(i, j)].re).collect()).collect();
        let im = if self.is_real(0.0) {
            None
        } else {
            Some((0..d).map(|i| (0..d).map(|j| self.m[(i, j)].im).collect()).collect())
        };
        HermitianJson { dim: d, registers: self.registers.clone(), re, im }
    }

    pub fn from_json(json: &HermitianJson) -> Result<Self> {
        let d = json.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == d && rows.iter().all(|r| r.len() == d);
        if !rows_ok(&json.re) || json.im.as_ref().is_some_and(|im| !rows_ok(im)) {
            return Err(Error::Malformed(format!("expected {d}x{d} entry arrays")));
        }
        let m = DMatrix::from_fn(d, d, |i, j| {
            let im = json.im.as_ref().map_or(0.0, |im| im[i][j]);
            Complex64::new(json.re[i][j], im)
        });
        Self::new(m, json.registers.clone())
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: HermitianJson = serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        Self::from_json(&json)
    }
}

fn hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let d = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            let e = (m[(i, j)] - m[(j, i)].conj()).norm();
            if e.is_nan() {
                return f64::NAN;
            }
            dev = dev.max(e);
        }
    }
    dev
}

/// Wire format `{"dim", "registers", "re", "im"}`; `im` may be omitted.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HermitianJson {
    pub dim: usize,
    #[serde(default)]
    pub registers: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}
