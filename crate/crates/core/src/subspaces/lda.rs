use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::projection::{normalize, Projection, ProjectionMethod};
use super::scatter::ScatterStats;
use crate::error::{Error, Result};
use crate::matrix::{canonicalize_sign, sym_eig, Matrix, SpdFactor};

/// Default ridge added to the intra-class scatter.
pub const DEFAULT_DELTA: f64 = 5e-3;
/// Default number of binary discriminant directions.
pub const DEFAULT_BINARY_DIMS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdaConfig {
    pub delta: f64,
    pub max_dims_binary: usize,
}

impl Default for LdaConfig {
    fn default() -> Self {
        LdaConfig {
            delta: DEFAULT_DELTA,
            max_dims_binary: DEFAULT_BINARY_DIMS,
        }
    }
}

impl LdaConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid(format!("delta must be positive, got {}", self.delta)));
        }
        Ok(())
    }
}

/// Multiclass Fisher discriminant: the C−1 leading generalized eigenvectors of
/// (S_B, S_W + δI), obtained through Cholesky whitening.
pub fn fit_lda_multiclass(stats: &ScatterStats, cfg: &LdaConfig) -> Result<Projection> {
    cfg.validate()?;
    let c = stats.class_count();
    if c < 2 {
        return Err(Error::NeedTwoClasses);
    }
    let m = stats.dims();
    let l = c - 1;
    if l > m {
        return Err(Error::invalid(format!(
            "{c} classes need {l} directions but features have only {m} dimensions"
        )));
    }

    let mut s_w = stats.s_w_total.as_dmatrix().clone();
    for i in 0..m {
        s_w[(i, i)] += cfg.delta;
    }
    let factor = SpdFactor::from_dmatrix(&s_w).map_err(|_| {
        Error::NumericalFailure("regularized intra-class scatter is not positive definite".into())
    })?;

    // A = L⁻¹ S_B L⁻ᵀ
    let left = factor.solve_lower(stats.s_b_total.as_dmatrix());
    let whitened = factor.solve_lower(&left.transpose());
    let eig = sym_eig(&Matrix::from_dmatrix(whitened))?;

    let top = eig.eigenvectors.as_dmatrix().columns(0, l).into_owned();
    let back = factor.solve_upper_transposed(&top);
    let mut directions = DMatrix::zeros(m, l);
    for j in 0..l {
        let mut d = back.column(j).into_owned();
        normalize(&mut d);
        let mut v: Vec<f64> = d.iter().copied().collect();
        canonicalize_sign(&mut v);
        directions.column_mut(j).copy_from_slice(&v);
    }

    let mut p = Projection::new(
        ProjectionMethod::LdaMulticlass,
        Matrix::from_dmatrix(directions),
    );
    p.discrim_values = eig.eigenvalues[..l].to_vec();
    p.regularization = cfg.delta;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::LabeledDataset;
    use crate::subspaces::{compute_scatter, discrim_values};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_dataset(n_per: usize, m: usize, c: usize, seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..c {
            let shift: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
            for _ in 0..n_per {
                rows.push(shift.iter().map(|s| s + rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
                labels.push(class);
            }
        }
        LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap()
    }

    #[test]
    fn four_classes_give_three_directions() {
        let d = random_dataset(10, 6, 4, 1);
        let p = fit_lda_multiclass(&compute_scatter(&d).unwrap(), &LdaConfig::default()).unwrap();
        assert_eq!(p.directions.shape(), (6, 3));
        for j in 0..3 {
            let n: f64 = p.directions.column(j).iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!(p.discrim_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn point_masses_give_the_separating_axis() {
        let f = Matrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [1.0, 0.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 0, 1, 1]).unwrap();
        let stats = compute_scatter(&d).unwrap();
        let p = fit_lda_multiclass(&stats, &LdaConfig::default()).unwrap();
        let dir = p.directions.column(0);

        // Oracle: brute-force Fisher ratio over a 1° grid of unit directions.
        let delta = DEFAULT_DELTA;
        let sb = stats.s_b_total.as_dmatrix();
        let ratio = |u: [f64; 2]| {
            let num = u[0] * (sb[(0, 0)] * u[0] + sb[(0, 1)] * u[1])
                + u[1] * (sb[(1, 0)] * u[0] + sb[(1, 1)] * u[1]);
            num / (delta * (u[0] * u[0] + u[1] * u[1]))
        };
        let best = (0..180)
            .map(|deg| {
                let t = (deg as f64).to_radians();
                [t.cos(), t.sin()]
            })
            .max_by(|a, b| ratio(*a).total_cmp(&ratio(*b)))
            .unwrap();
        assert_eq!(best, [1.0, 0.0]);
        assert!((dir[0].abs() - 1.0).abs() < 1e-12 && dir[1].abs() < 1e-12);
    }

    #[test]
    fn singular_intra_scatter_is_regularized() {
        let f = Matrix::from_rows(&[[1.0, 2.0, 0.0], [3.0, 5.0, 1.0], [0.0, 1.0, 4.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 1, 2]).unwrap();
        let stats = compute_scatter(&d).unwrap();
        let p = fit_lda_multiclass(&stats, &LdaConfig::default()).unwrap();
        assert_eq!(p.dims, 2);
        assert_eq!(p.regularization, DEFAULT_DELTA);
    }

    #[test]
    fn discrim_values_recompute() {
        let d = random_dataset(8, 5, 3, 7);
        let stats = compute_scatter(&d).unwrap();
        let p = fit_lda_multiclass(&stats, &LdaConfig::default()).unwrap();
        let g = discrim_values(&p, &stats).unwrap();
        for (a, b) in g.iter().zip(&p.discrim_values) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn rejects_non_positive_delta() {
        let d = random_dataset(4, 3, 2, 2);
        let stats = compute_scatter(&d).unwrap();
        let cfg = LdaConfig {
            delta: 0.0,
            ..LdaConfig::default()
        };
        assert!(fit_lda_multiclass(&stats, &cfg).is_err());
    }
}
