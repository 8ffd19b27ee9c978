//! Dense real matrices and the decompositions the subspace methods are built on.
//!
//! [`Matrix`] is a thin validated wrapper over [`nalgebra::DMatrix`]. The three
//! decompositions ([`svd_decompose`], [`sym_eig`], [`SpdFactor`]) return results with a
//! canonical ordering and a canonical sign (largest-magnitude entry of each singular or
//! eigen vector is positive) so that repeated runs produce identical outputs.

use std::fmt;
use std::ops::Index;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-count × column-count matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct Matrix(DMatrix<f64>);

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("matrix shape {rows}x{cols} is empty")));
        }
        if entries.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Matrix(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Builds a matrix from a list of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            entries.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Matrix(DMatrix::identity(n, n))
    }

    /// Square matrix with `diag` on the diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        Matrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Wraps an existing nalgebra matrix without validation.
    pub fn from_dmatrix(m: DMatrix<f64>) -> Self {
        Matrix(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.0.row(i).iter().copied().collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.0.column(j).iter().copied().collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend(self.0.row(i).iter());
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols() != other.rows() {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Matrix(&self.0 * &other.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// New matrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        Matrix(self.0.select_rows(indices))
    }

    /// New matrix made of the first `n` columns.
    pub fn leading_columns(&self, n: usize) -> Matrix {
        Matrix(self.0.columns(0, n).into_owned())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{:?} ", self.shape())?;
        f.debug_list()
            .entries((0..self.rows()).map(|i| self.row(i)))
            .finish()
    }
}

/// Row-major JSON form: `{"rows": r, "cols": c, "data": [...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRepr {
            rows: self.rows(),
            cols: self.cols(),
            data: self.to_row_major(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(d)?;
        Matrix::from_row_major(repr.rows, repr.cols, repr.data).map_err(serde::de::Error::custom)
    }
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
/// Returns true if the vector was flipped.
pub(crate) fn canonicalize_sign(v: &mut [f64]) -> bool {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
        true
    } else {
        false
    }
}

fn canonicalize_column(m: &mut DMatrix<f64>, j: usize) -> bool {
    let mut col: Vec<f64> = m.column(j).iter().copied().collect();
    let flipped = canonicalize_sign(&mut col);
    if flipped {
        m.column_mut(j).copy_from_slice(&col);
    }
    flipped
}

fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.0.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid("matrix contains non-finite entries"))
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// rows × r, orthonormal columns.
    pub u: Matrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// cols × r, orthonormal columns.
    pub v: Matrix,
}

impl SvdResult {
    /// `U diag(s) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.singular_values));
        Matrix(&self.u.0 * s * self.v.0.transpose())
    }
}

/// Thin SVD with singular values sorted non-increasing, r = min(rows, cols).
pub fn svd_decompose(a: &Matrix) -> Result<SvdResult> {
    let (u, values, v) = sorted_svd(a, true)?;
    Ok(SvdResult {
        u: u.expect("U requested"),
        singular_values: values,
        v,
    })
}

/// Singular values and right singular vectors only (cheaper than the full thin SVD).
pub fn svd_right(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (_, values, v) = sorted_svd(a, false)?;
    Ok((values, v))
}

fn sorted_svd(a: &Matrix, want_u: bool) -> Result<(Option<Matrix>, Vec<f64>, Matrix)> {
    ensure_finite(a)?;
    let svd = SVD::new(a.0.clone(), want_u, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD did not produce V".into()))?;
    let s = svd.singular_values;

    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));

    let r = order.len();
    let mut u_out = svd.u.as_ref().map(|_| DMatrix::zeros(a.rows(), r));
    let mut v_out = DMatrix::zeros(a.cols(), r);
    let mut values = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        values.push(s[src].max(0.0));
        v_out.set_column(dst, &v_t.row(src).transpose());
        let flipped = canonicalize_column(&mut v_out, dst);
        if let (Some(u_out), Some(u)) = (u_out.as_mut(), svd.u.as_ref()) {
            if flipped {
                u_out.set_column(dst, &(-u.column(src)));
            } else {
                u_out.set_column(dst, &u.column(src));
            }
        }
    }
    Ok((u_out.map(Matrix), values, Matrix(v_out)))
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Column i is the unit eigenvector of `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

/// Symmetric eigendecomposition; the input is symmetrized as (A + Aᵀ)/2 first.
pub fn sym_eig(a: &Matrix) -> Result<SymEigResult> {
    if a.rows() != a.cols() {
        return Err(Error::invalid(format!(
            "sym_eig needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    ensure_finite(a)?;
    let sym = (&a.0 + a.0.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let vals = eig.eigenvalues;

    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));

    let mut vecs = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(vals[src]);
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        canonicalize_column(&mut vecs, dst);
    }
    Ok(SymEigResult {
        eigenvalues: values,
        eigenvectors: Matrix(vecs),
    })
}

/// Cholesky factor of a symmetric positive definite matrix, reusable across right-hand sides.
#[derive(Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
    max_diag: f64,
}

impl SpdFactor {
    pub fn new(a: &Matrix) -> Result<Self> {
        Self::from_dmatrix(&a.0)
    }

    pub(crate) fn from_dmatrix(a: &DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::invalid(format!(
                "Cholesky needs a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix contains non-finite entries"));
        }
        let max_diag = a.diagonal().iter().copied().fold(0.0, f64::max);
        let chol = Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(SpdFactor { chol, max_diag })
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    /// Smallest squared pivot of the factor relative to the largest diagonal entry of
    /// the factored matrix; a cheap lower bound proxy for its conditioning.
    pub fn relative_min_pivot(&self) -> f64 {
        let l = self.chol.l_dirty();
        let min_pivot = (0..l.nrows())
            .map(|i| l[(i, i)] * l[(i, i)])
            .fold(f64::INFINITY, f64::min);
        if self.max_diag > 0.0 {
            min_pivot / self.max_diag
        } else {
            0.0
        }
    }

    /// Lower-triangular factor `L` with `A = L Lᵀ`.
    pub fn lower(&self) -> Matrix {
        Matrix(self.chol.l())
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows() != self.dim() {
            return Err(Error::invalid(format!(
                "right-hand side has {} rows, factor is {}x{}",
                b.rows(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(Matrix(self.chol.solve(&b.0)))
    }

    pub(crate) fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }

    /// Solves `L x = b` (forward substitution only).
    pub(crate) fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// Solves `Lᵀ x = b` (backward substitution only).
    pub(crate) fn solve_upper_transposed(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol
            .l_dirty()
            .tr_solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal")
    }
}

impl fmt::Debug for SpdFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpdFactor").field("dim", &self.dim()).finish()
    }
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn solve_spd(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    SpdFactor::new(a)?.solve(b)
}
