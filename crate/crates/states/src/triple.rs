use hermitian_core::{Complex64, HermitianMatrix, HERMITIAN_TOL};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::StateError;

/// Default tolerance for off-pattern entries when reading a triple off a state.
pub const LDOI_TOL: f64 = 1e-10;

/// Triple `(X, Y, Z)` holding every entry of an LDOI state:
/// `X_ij = rho_{ij,ij}`, `Y_ij = rho_{ii,jj}`, `Z_ij = rho_{ij,ji}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleXYZ {
    n: usize,
    x: DMatrix<f64>,
    y: DMatrix<Complex64>,
    z: DMatrix<Complex64>,
}

fn hermitian_dev(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

impl TripleXYZ {
    /// Checks shapes, Hermiticity of `Y` and `Z`, and exact equality of the
    /// three diagonals.
    pub fn new(x: DMatrix<f64>, y: DMatrix<Complex64>, z: DMatrix<Complex64>) -> Result<Self, StateError> {
        let n = x.nrows();
        for (r, c) in [x.shape(), y.shape(), z.shape()] {
            if r != n || c != n {
                return Err(StateError::Shape(format!("expected {n}x{n} blocks, got {r}x{c}")));
            }
        }
        for (name, m) in [("Y", &y), ("Z", &z)] {
            let d = hermitian_dev(m);
            if !(d <= HERMITIAN_TOL) {
                return Err(StateError::Shape(format!("{name} is not Hermitian (deviation {d:e})")));
            }
        }
        for i in 0..n {
            if y[(i, i)] != Complex64::new(x[(i, i)], 0.0) || z[(i, i)] != Complex64::new(x[(i, i)], 0.0) {
                return Err(StateError::DiagonalMismatch(i));
            }
        }
        let y = (&y + y.adjoint()).map(|v| v * 0.5);
        let z = (&z + z.adjoint()).map(|v| v * 0.5);
        Ok(Self { n, x, y, z })
    }

    pub fn from_real(x: DMatrix<f64>, y: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self, StateError> {
        let c = |m: DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
        Self::new(x, c(y), c(z))
    }

    /// Pair `(X, Y)`: the CLDUI case, `Z` diagonal.
    pub fn from_pair(x: DMatrix<f64>, y: DMatrix<Complex64>) -> Result<Self, StateError> {
        let n = x.nrows();
        let z = DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { Complex64::new(x[(i, i)], 0.0) } else { Complex64::new(0.0, 0.0) },
        );
        Self::new(x, y, z)
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, x: DMatrix::zeros(n, n), y: DMatrix::zeros(n, n), z: DMatrix::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<Complex64> {
        &self.y
    }

    pub fn z(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    /// True when `Y` and `Z` have no imaginary parts.
    pub fn is_real(&self) -> bool {
        self.y.iter().chain(self.z.iter()).all(|v| v.im == 0.0)
    }

    /// Largest entrywise difference across the three matrices.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let dx = (&self.x - &other.x).abs().max();
        let dy = (&self.y - &other.y).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let dz = (&self.z - &other.z).iter().map(|v| v.norm()).fold(0.0, f64::max);
        dx.max(dy).max(dz)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, x: &self.x * s, y: self.y.map(|v| v * s), z: self.z.map(|v| v * s) }
    }

    pub fn to_json(&self) -> TripleJson {
        let rows = |f: &dyn Fn(usize, usize) -> f64| -> Vec<Vec<f64>> {
            (0..self.n).map(|i| (0..self.n).map(|j| f(i, j)).collect()).collect()
        };
        let real = self.is_real();
        TripleJson {
            n: self.n,
            x: rows(&|i, j| self.x[(i, j)]),
            y_re: rows(&|i, j| self.y[(i, j)].re),
            y_im: (!real).then(|| rows(&|i, j| self.y[(i, j)].im)),
            z_re: rows(&|i, j| self.z[(i, j)].re),
            z_im: (!real).then(|| rows(&|i, j| self.z[(i, j)].im)),
        }
    }

    pub fn from_json(j: &TripleJson) -> Result<Self, StateError> {
        let n = j.n;
        let ok = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        let parts = [Some(&j.x), Some(&j.y_re), j.y_im.as_ref(), Some(&j.z_re), j.z_im.as_ref()];
        if parts.iter().flatten().any(|m| !ok(m)) {
            return Err(StateError::Shape(format!("triple entries must be {n}x{n}")));
        }
        let dm = |m: &Vec<Vec<f64>>| DMatrix::from_fn(n, n, |a, b| m[a][b]);
        let cm = |re: &Vec<Vec<f64>>, im: Option<&Vec<Vec<f64>>>| {
            DMatrix::from_fn(n, n, |a, b| Complex64::new(re[a][b], im.map_or(0.0, |m| m[a][b])))
        };
        Self::new(dm(&j.x), cm(&j.y_re, j.y_im.as_ref()), cm(&j.z_re, j.z_im.as_ref()))
    }
}

/// Wire format `{"n", "X", "Y_re", "Y_im", "Z_re", "Z_im"}`; imaginary parts optional.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TripleJson {
    pub n: usize,
    #[serde(rename = "X")]
    pub x: Vec<Vec<f64>>,
    #[serde(rename = "Y_re")]
    pub y_re: Vec<Vec<f64>>,
    #[serde(rename = "Y_im", default, skip_serializing_if = "Option::is_none")]
    pub y_im: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Z_re")]
    pub z_re: Vec<Vec<f64>>,
    #[serde(rename = "Z_im", default, skip_serializing_if = "Option::is_none")]
    pub z_im: Option<Vec<Vec<f64>>>,
}

/// The LDOI state of a triple (registers `[n, n]`).
pub fn rho_from_triple(t: &TripleXYZ) -> HermitianMatrix {
    let n = t.n;
    let mut m = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + j, i * n + j)] = Complex64::new(t.x[(i, j)], 0.0);
            if i != j {
                m[(i * n + i, j * n + j)] = t.y[(i, j)];
                m[(i * n + j, j * n + i)] = t.z[(i, j)];
            }
        }
    }
    HermitianMatrix::new(m, vec![n, n]).expect("triple data is Hermitian")
}

/// Reads the triple off an LDOI state; entries outside the LDOI support must
/// be at most `tol` in modulus.
pub fn triple_from_rho(rho: &HermitianMatrix, tol: f64) -> Result<TripleXYZ, StateError> {
    let n = square_registers(rho)?;
    let mut off: f64 = 0.0;
    for a in 0..n * n {
        for b in 0..n * n {
            let (i, j, k, l) = (a / n, a % n, b / n, b % n);
            let on = (i == k && j == l) || (i == j && k == l) || (i == l && j == k);
            if !on {
                off = off.max(rho.get(a, b).norm());
            }
        }
    }
    if off > tol {
        return Err(StateError::NotLdoi(off));
    }
    let x = DMatrix::from_fn(n, n, |i, j| rho.get(i * n + j, i * n + j).re);
    let diag = |i: usize, j: usize, v: Complex64| if i == j { Complex64::new(x[(i, i)], 0.0) } else { v };
    let y = DMatrix::from_fn(n, n, |i, j| diag(i, j, rho.get(i * n + i, j * n + j)));
    let z = DMatrix::from_fn(n, n, |i, j| diag(i, j, rho.get(i * n + j, j * n + i)));
    TripleXYZ::new(x, y, z)
}

/// Local dimension of a state on registers `[n, n]`.
pub fn square_registers(rho: &HermitianMatrix) -> Result<usize, StateError> {
    match rho.registers() {
        [a, b] if a == b => Ok(*a),
        other => Err(StateError::Registers(other.to_vec())),
    }
}
