//! Orthonormal discriminant directions for two-class problems.
//!
//! The first direction is the Fisher direction `S̃_W⁻¹ s_b`. Each further direction
//! maximizes the same Fisher ratio subject to orthogonality with all earlier ones:
//!
//! ```text
//! d_n ∝ S̃_W⁻¹ ( s_b − D S⁻¹ [1/α₁, 0, …, 0]ᵀ ),   S_ij = d_iᵀ S̃_W⁻¹ d_j
//! ```
//!
//! where `D = [d₁ … d_{n−1}]` and `α₁ = 1/‖S̃_W⁻¹ s_b‖`. Every application of
//! `S̃_W⁻¹` is a solve against one Cholesky factor.

use nalgebra::{DMatrix, DVector};

use super::lda::LdaConfig;
use super::projection::{normalize, Projection, ProjectionMethod};
use super::scatter::ScatterStats;
use crate::error::{Error, Result};
use crate::matrix::{canonicalize_sign, Matrix, SpdFactor};

/// A Cholesky pivot below this fraction of the largest diagonal entry counts as a failed
/// factorization, triggering the δI ridge.
pub const SINGULAR_PIVOT_TOLERANCE: f64 = 1e-10;

/// Mean differences at or below this norm have no discriminant direction.
pub const DEGENERATE_MEANS_TOLERANCE: f64 = 1e-12;

/// Once `s_b` lies in the span of the directions found so far (relative residual below
/// this), every remaining orthogonal direction has a zero Fisher ratio.
const EXHAUSTED_TOLERANCE: f64 = 1e-10;

/// Factors S̃_W, adding `delta·I` when it is singular or too ill-conditioned.
/// Returns the factor and the ridge that was applied.
pub(crate) fn factor_binary_scatter(s_w: &Matrix, delta: f64) -> Result<(SpdFactor, f64)> {
    if let Ok(f) = SpdFactor::new(s_w) {
        if f.relative_min_pivot() > SINGULAR_PIVOT_TOLERANCE {
            return Ok((f, 0.0));
        }
    }
    let mut reg = s_w.as_dmatrix().clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += delta;
    }
    let f = SpdFactor::from_dmatrix(&reg).map_err(|_| {
        Error::NumericalFailure("regularized binary intra-class scatter is not positive definite".into())
    })?;
    Ok((f, delta))
}

pub fn fit_fs_binary(stats: &ScatterStats, dims: usize, cfg: &LdaConfig) -> Result<Projection> {
    cfg.validate()?;
    let binary = stats
        .binary
        .as_ref()
        .ok_or(Error::NotBinary(stats.class_count()))?;
    let m = stats.dims();
    if dims == 0 || dims > m {
        return Err(Error::invalid(format!(
            "number of binary discriminant directions must be in 1..={m}, got {dims}"
        )));
    }
    let s_b = DVector::from_column_slice(&binary.s_b);
    if s_b.norm() <= DEGENERATE_MEANS_TOLERANCE {
        return Err(Error::DegenerateMeans);
    }

    let (factor, ridge) = factor_binary_scatter(&binary.s_w, cfg.delta)?;

    let mut first = factor.solve_vec(&s_b);
    let first_norm = normalize(&mut first);
    if !first_norm.is_finite() || first_norm == 0.0 {
        return Err(Error::NumericalFailure("first discriminant direction vanished".into()));
    }
    let inv_alpha1 = first_norm;

    // Columns d_i and S̃_W⁻¹ d_i.
    let mut dirs: Vec<DVector<f64>> = vec![first];
    let mut solved: Vec<DVector<f64>> = vec![factor.solve_vec(&dirs[0])];

    while dirs.len() < dims {
        let n = dirs.len() + 1;
        let k = dirs.len();
        let gram = DMatrix::from_fn(k, k, |i, j| {
            0.5 * (dirs[i].dot(&solved[j]) + dirs[j].dot(&solved[i]))
        });
        let gram = SpdFactor::from_dmatrix(&gram).map_err(|_| Error::RecursionBreakdown {
            at: n,
            produced: k,
        })?;
        let mut e1 = DVector::zeros(k);
        e1[0] = inv_alpha1;
        let coeffs = gram.solve_vec(&e1);
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::RecursionBreakdown { at: n, produced: k });
        }

        let mut bracket = s_b.clone();
        for (d, c) in dirs.iter().zip(coeffs.iter()) {
            bracket.axpy(-c, d, 1.0);
        }
        let mut next = factor.solve_vec(&bracket);
        reorthogonalize(&mut next, &dirs);

        if next.norm() <= EXHAUSTED_TOLERANCE * inv_alpha1 {
            next = orthogonal_complement_vector(&dirs, m);
        } else {
            normalize(&mut next);
        }
        solved.push(factor.solve_vec(&next));
        dirs.push(next);
    }

    let mut w_used = binary.s_w.as_dmatrix().clone();
    for i in 0..m {
        w_used[(i, i)] += ridge;
    }
    let mut directions = DMatrix::zeros(m, dims);
    let mut gammas = Vec::with_capacity(dims);
    for (j, d) in dirs.iter().enumerate() {
        gammas.push(binary_ratio(d, &s_b, &w_used));
        let mut v: Vec<f64> = d.iter().copied().collect();
        canonicalize_sign(&mut v);
        directions.column_mut(j).copy_from_slice(&v);
    }

    let mut p = Projection::new(ProjectionMethod::FsBinary, Matrix::from_dmatrix(directions));
    p.discrim_values = gammas;
    p.regularization = ridge;
    Ok(p)
}

/// (dᵀ s_b)² / (dᵀ W d)
pub(crate) fn binary_ratio(d: &DVector<f64>, s_b: &DVector<f64>, w: &DMatrix<f64>) -> f64 {
    let num = d.dot(s_b).powi(2);
    let den = d.dot(&(w * d));
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// One Gram–Schmidt pass of `v` against orthonormal `basis`.
fn reorthogonalize(v: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let c = b.dot(v);
        v.axpy(-c, b, 1.0);
    }
}

/// Unit vector orthogonal to `basis`: the standard axis with the largest residual after
/// projecting out the basis (lowest index on ties), orthogonalized twice.
fn orthogonal_complement_vector(basis: &[DVector<f64>], m: usize) -> DVector<f64> {
    let mut best: Option<DVector<f64>> = None;
    let mut best_norm = -1.0;
    for axis in 0..m {
        let mut v = DVector::zeros(m);
        v[axis] = 1.0;
        reorthogonalize(&mut v, basis);
        let n = v.norm();
        if n > best_norm + 1e-12 {
            best_norm = n;
            best = Some(v);
        }
    }
    let mut v = best.expect("m >= 1");
    reorthogonalize(&mut v, basis);
    normalize(&mut v);
    v
}
