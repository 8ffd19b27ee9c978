use super::projection::{Projection, ProjectionMethod};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix::{svd_right, Matrix};

/// Top-`p` right singular vectors of the training matrix (column-centered first if `center`).
pub fn fit_svd_subspace(train: &LabeledDataset, p: usize, center: bool) -> Result<Projection> {
    let y = train.features();
    let limit = y.rows().min(y.cols());
    if p == 0 || p > limit {
        return Err(Error::invalid(format!(
            "SVD subspace dimension must be in 1..={limit}, got {p}"
        )));
    }

    let means: Option<Vec<f64>> =
        center.then(|| y.as_dmatrix().row_mean().iter().copied().collect());
    let (values, v) = match &means {
        Some(mu) => {
            let mut centered = y.as_dmatrix().clone();
            for mut r in centered.row_iter_mut() {
                for (x, m) in r.iter_mut().zip(mu) {
                    *x -= m;
                }
            }
            svd_right(&Matrix::from_dmatrix(centered))?
        }
        None => svd_right(y)?,
    };

    let mut proj = Projection::new(ProjectionMethod::Svd, v.leading_columns(p));
    proj.singular_values = values[..p].to_vec();
    proj.center = means;
    Ok(proj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_rows_give_axes() {
        let f = Matrix::from_diagonal(&[5.0, 3.0, 1.0]);
        let d = LabeledDataset::new(f, vec![0, 1, 2]).unwrap();
        let p = fit_svd_subspace(&d, 2, false).unwrap();
        assert_eq!(p.directions.column(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(p.directions.column(1), vec![0.0, 1.0, 0.0]);
        assert_eq!(p.singular_values, vec![5.0, 3.0]);
    }

    #[test]
    fn full_rank_projection_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let d = LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), vec![0; 7]).unwrap();
        let p = fit_svd_subspace(&d, 4, false).unwrap();
        let z = p.project(d.features()).unwrap();
        let back = z.as_dmatrix() * p.directions.as_dmatrix().transpose();
        let rel = (back.norm() - d.features().frobenius_norm()).abs() / d.features().frobenius_norm();
        assert!(rel <= 1e-8);
    }

    #[test]
    fn centered_fit_stores_means() {
        let f = Matrix::from_rows(&[[1.0, 10.0], [3.0, 10.0], [2.0, 13.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 1, 0]).unwrap();
        let p = fit_svd_subspace(&d, 1, true).unwrap();
        assert_eq!(p.center.as_deref(), Some(&[2.0, 11.0][..]));
    }

    #[test]
    fn out_of_range_dimension() {
        let f = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 1]).unwrap();
        assert!(fit_svd_subspace(&d, 0, false).is_err());
        assert!(fit_svd_subspace(&d, 3, false).is_err());
    }
}
