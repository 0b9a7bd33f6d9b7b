use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{psd_accepts, Error, Result, HERMITIAN_TOL};

/// Dense real symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymmetric {
    m: DMatrix<f64>,
}

impl RealSymmetric {
    /// Rejects matrices farther than [`HERMITIAN_TOL`] from symmetric and
    /// symmetrizes the rest.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let mut dev: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in i..m.nrows() {
                dev = dev.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if !(dev <= HERMITIAN_TOL) {
            return Err(Error::NotSymmetric(dev));
        }
        Ok(Self::from_symmetric_unchecked((&m + m.transpose()) * 0.5))
    }

    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, f: F) -> Result<Self> {
        Self::new(DMatrix::from_fn(n, n, f))
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self) -> bool {
        psd_accepts(self.min_eigenvalue(), self.frobenius_norm())
    }

    pub fn to_json(&self) -> RealMatrixJson {
        let n = self.dim();
        RealMatrixJson { n, entries: (0..n).map(|i| (0..n).map(|j| self.m[(i, j)]).collect()).collect() }
    }

    pub fn from_json(json: &RealMatrixJson) -> Result<Self> {
        let n = json.n;
        if json.entries.len() != n || json.entries.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed(format!("expected {n}x{n} entries")));
        }
        Self::from_fn(n, |i, j| json.entries[i][j])
    }
}

/// Wire format `{"n", "entries"}` with row-major nested arrays.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RealMatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}
