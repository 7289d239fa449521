//! Real symmetric matrices and the handful of dense factorizations the
//! Gaussian calculus needs.

use faer::linalg::solvers::{Llt, SelfAdjointEigen};
use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};

/// Relative asymmetry tolerated by [`SymmetricMatrix::new`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A real symmetric matrix. The stored entries are exactly symmetric.
#[derive(Clone, Debug)]
pub struct SymmetricMatrix(Mat<f64>);

impl SymmetricMatrix {
    /// Validates symmetry to [`SYMMETRY_TOLERANCE`] relative to the largest
    /// entry, then stores the symmetric part.
    pub fn new(m: Mat<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        let mut scale = 0.0f64;
        let mut asym = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                scale = scale.max(m[(i, j)].abs());
                asym = asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOLERANCE * scale.max(1.0) {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        Self::new(Mat::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from a generator that is symmetric by construction.
    pub(crate) fn from_fn(n: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Self::symmetrized(Mat::from_fn(n, n, f))
    }

    pub(crate) fn symmetrized(mut m: Mat<f64>) -> Self {
        let n = m.nrows();
        for j in 0..n {
            for i in (j + 1)..n {
                let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = avg;
                m[(j, i)] = avg;
            }
        }
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(Mat::identity(n, n))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        self.0.as_ref()
    }

    pub fn into_inner(self) -> Mat<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order())
            .map(|i| (0..self.order()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    /// Principal submatrix on `modes`, in the given order.
    pub fn principal(&self, modes: &[usize]) -> Self {
        Self(Mat::from_fn(modes.len(), modes.len(), |i, j| {
            self.0[(modes[i], modes[j])]
        }))
    }

    /// Rectangular block with the given rows and columns.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat<f64> {
        Mat::from_fn(rows.len(), cols.len(), |i, j| self.0[(rows[i], cols[j])])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order(), other.order());
        let n = self.order();
        let mut d = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                d = d.max((self.0[(i, j)] - other.0[(i, j)]).abs());
            }
        }
        d
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.0
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> Result<(Vec<f64>, Mat<f64>)> {
        let evd = SelfAdjointEigen::new(self.0.as_ref(), Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let values = (0..self.order()).map(|i| s[i]).collect();
        Ok((values, evd.U().to_owned()))
    }

    /// `f(self)` through a dense eigendecomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let (values, u) = self.eigen()?;
        let mut fv = Vec::with_capacity(values.len());
        for &lam in &values {
            let y = f(lam);
            if !y.is_finite() {
                return Err(Error::NonFiniteFunction(lam));
            }
            fv.push(y);
        }
        let n = self.order();
        let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * fv[j]);
        Ok(Self::symmetrized(&scaled * u.transpose()))
    }

    /// Lower Cholesky factor; `what` names the matrix in the error.
    pub fn cholesky(&self, what: &'static str) -> Result<Llt<f64>> {
        Llt::new(self.0.as_ref(), Side::Lower).map_err(|_| Error::NotPositiveDefinite(what))
    }

    pub fn ln_det(&self, what: &'static str) -> Result<f64> {
        let llt = self.cholesky(what)?;
        Ok(ln_det_from_llt(&llt))
    }
}

impl PartialEq for SymmetricMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.order() == other.order() && self.max_abs_diff(other) == 0.0
    }
}

pub(crate) fn ln_det_from_llt(llt: &Llt<f64>) -> f64 {
    let l = llt.L();
    (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
}

/// Eigenvalues of `a * b` for symmetric `a` (positive definite) and `b`,
/// via the congruent symmetric matrix `L^T b L` with `a = L L^T`.
pub(crate) fn product_eigenvalues(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    what: &'static str,
) -> Result<Vec<f64>> {
    let llt = a.cholesky(what)?;
    let l = llt.L();
    let inner = l.transpose() * b.as_mat() * l;
    SymmetricMatrix::symmetrized(inner).eigenvalues()
}
