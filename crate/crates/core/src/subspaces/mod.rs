//! Linear subspaces fitted on training data: multiclass LDA, orthonormal binary
//! discriminant directions, and truncated SVD.

mod foley_sammon;
mod lda;
mod projection;
mod scatter;
mod svd;

pub use foley_sammon::{fit_fs_binary, DEGENERATE_MEANS_TOLERANCE, SINGULAR_PIVOT_TOLERANCE};
pub use lda::{fit_lda_multiclass, LdaConfig, DEFAULT_BINARY_DIMS, DEFAULT_DELTA};
pub use projection::{Projection, ProjectionMethod};
pub use scatter::{compute_scatter, BinaryScatter, ScatterStats};
pub use svd::fit_svd_subspace;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Recomputes the Fisher ratio of every direction of a discriminant projection against
/// `stats`, using the same ridge the projection was fitted with.
///
/// For `fs_binary`: (dᵀ s_b)² / dᵀ(S̃_W + δI)d. For `lda_multiclass`: dᵀ S_B d / dᵀ(S_W + δI)d.
pub fn discrim_values(p: &Projection, stats: &ScatterStats) -> Result<Vec<f64>> {
    if p.source_dims != stats.dims() {
        return Err(Error::invalid(format!(
            "projection has {} source dims, stats have {}",
            p.source_dims,
            stats.dims()
        )));
    }
    let ridge = |m: &DMatrix<f64>| {
        let mut m = m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += p.regularization;
        }
        m
    };
    let w = p.directions.as_dmatrix();
    match p.method {
        ProjectionMethod::FsBinary => {
            let b = stats
                .binary
                .as_ref()
                .ok_or(Error::NotBinary(stats.class_count()))?;
            let s_b = DVector::from_column_slice(&b.s_b);
            let s_w = ridge(b.s_w.as_dmatrix());
            Ok(w.column_iter()
                .map(|d| foley_sammon::binary_ratio(&d.into_owned(), &s_b, &s_w))
                .collect())
        }
        ProjectionMethod::LdaMulticlass => {
            let s_b = stats.s_b_total.as_dmatrix();
            let s_w = ridge(stats.s_w_total.as_dmatrix());
            Ok(w.column_iter()
                .map(|d| {
                    let num = d.dot(&(s_b * d));
                    if num == 0.0 {
                        0.0
                    } else {
                        num / d.dot(&(&s_w * d))
                    }
                })
                .collect())
        }
        ProjectionMethod::Svd => Err(Error::invalid(
            "discrim-values are defined only for discriminant projections",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use crate::matrix::Matrix;

    #[test]
    fn hand_example_gamma() {
        let f = Matrix::from_rows(&[[1.0, 0.0], [3.0, 0.0], [0.0, 2.0], [0.0, 4.0]]).unwrap();
        let stats = compute_scatter(&LabeledDataset::new(f, vec![0, 0, 1, 1]).unwrap()).unwrap();
        let r = 13f64.sqrt();
        let mut p = Projection::new(
            ProjectionMethod::FsBinary,
            Matrix::from_rows(&[[2.0 / r], [-3.0 / r]]).unwrap(),
        );
        p.discrim_values = vec![13.0];
        let g = discrim_values(&p, &stats).unwrap();
        assert!((g[0] - 13.0).abs() < 1e-12);
    }

    #[test]
    fn identical_means_give_zero() {
        let f = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]).unwrap();
        let stats = compute_scatter(&LabeledDataset::new(f, vec![0, 0, 1, 1]).unwrap()).unwrap();
        let p = Projection::new(ProjectionMethod::FsBinary, Matrix::identity(2));
        assert_eq!(discrim_values(&p, &stats).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn mismatched_dims_and_svd_rejected() {
        let f = Matrix::from_rows(&[[1.0, 0.0], [3.0, 0.0], [0.0, 2.0], [0.0, 4.0]]).unwrap();
        let stats = compute_scatter(&LabeledDataset::new(f, vec![0, 0, 1, 1]).unwrap()).unwrap();
        let p = Projection::new(ProjectionMethod::FsBinary, Matrix::identity(3));
        assert!(matches!(discrim_values(&p, &stats), Err(Error::InvalidInput(_))));
        let p = Projection::new(ProjectionMethod::Svd, Matrix::identity(2));
        assert!(discrim_values(&p, &stats).is_err());
    }
}
