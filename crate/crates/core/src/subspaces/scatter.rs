use nalgebra::{DMatrix, DVector};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Two-class quantities: mean difference and the size-weighted intra-class scatter.
#[derive(Debug, Clone)]
pub struct BinaryScatter {
    /// ȳ₁ − ȳ₂.
    pub s_b: Vec<f64>,
    /// β S_W¹ + (1 − β) S_W².
    pub s_w: Matrix,
    /// β = (N₂ − 1)/(N₁ + N₂ − 2); 1/2 when both classes have a single sample.
    pub balance_weight: f64,
}

/// Class means and scatter matrices of a labeled dataset.
#[derive(Debug, Clone)]
pub struct ScatterStats {
    pub global_mean: Vec<f64>,
    pub class_means: Vec<Vec<f64>>,
    pub class_sizes: Vec<usize>,
    /// Σ_j Σ_{y∈Λ_j} (y − ȳ_j)(y − ȳ_j)ᵀ.
    pub s_w_total: Matrix,
    /// Σ_j (ȳ_j − ȳ)(ȳ_j − ȳ)ᵀ, unweighted by class size.
    pub s_b_total: Matrix,
    /// Present iff there are exactly two classes.
    pub binary: Option<BinaryScatter>,
}

impl ScatterStats {
    pub fn dims(&self) -> usize {
        self.global_mean.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_means.len()
    }
}

pub fn compute_scatter(d: &LabeledDataset) -> Result<ScatterStats> {
    let c = d.class_count();
    if c < 2 {
        return Err(Error::NeedTwoClasses);
    }
    let y = d.features().as_dmatrix();
    let m = y.ncols();
    let global: DVector<f64> = y.row_mean().transpose();

    let mut class_means = Vec::with_capacity(c);
    let mut class_scatter = Vec::with_capacity(c);
    let mut s_w = DMatrix::zeros(m, m);
    let mut s_b = DMatrix::zeros(m, m);
    for members in d.class_index() {
        let rows = y.select_rows(members);
        let mean: DVector<f64> = rows.row_mean().transpose();
        let mut centered = rows;
        for mut r in centered.row_iter_mut() {
            r -= mean.transpose();
        }
        let scatter = centered.tr_mul(&centered);
        s_w += &scatter;
        let diff = &mean - &global;
        s_b += &diff * diff.transpose();
        class_means.push(mean);
        class_scatter.push(scatter);
    }

    let binary = (c == 2).then(|| {
        let (n1, n2) = (d.class_index()[0].len(), d.class_index()[1].len());
        let denom = n1 + n2 - 2;
        let beta = if denom == 0 {
            0.5
        } else {
            (n2 as f64 - 1.0) / denom as f64
        };
        let s_w = &class_scatter[0] * beta + &class_scatter[1] * (1.0 - beta);
        BinaryScatter {
            s_b: (&class_means[0] - &class_means[1]).iter().copied().collect(),
            s_w: Matrix::from_dmatrix(s_w),
            balance_weight: beta,
        }
    });

    Ok(ScatterStats {
        global_mean: global.iter().copied().collect(),
        class_means: class_means
            .into_iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        class_sizes: d.class_sizes(),
        s_w_total: Matrix::from_dmatrix(s_w),
        s_b_total: Matrix::from_dmatrix(s_b),
        binary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{svd_decompose, sym_eig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn four_points() -> LabeledDataset {
        let f = Matrix::from_rows(&[[1.0, 0.0], [3.0, 0.0], [0.0, 2.0], [0.0, 4.0]]).unwrap();
        LabeledDataset::new(f, vec![0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn four_point_example() {
        let s = compute_scatter(&four_points()).unwrap();
        assert_eq!(s.class_means, vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
        let b = s.binary.as_ref().unwrap();
        assert_eq!(b.s_b, vec![2.0, -3.0]);
        assert_eq!(b.balance_weight, 0.5);
        assert_eq!(b.s_w, Matrix::identity(2));
        // S_W = S_W¹ + S_W² = diag(2, 2).
        assert_eq!(s.s_w_total, Matrix::from_diagonal(&[2.0, 2.0]));
    }

    #[test]
    fn unequal_sizes_weight() {
        let f = Matrix::from_rows(&[[0.0], [1.0], [2.0], [5.0], [6.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 0, 0, 1, 1]).unwrap();
        let s = compute_scatter(&d).unwrap();
        // β = (2 − 1)/(3 + 2 − 2)
        assert!((s.binary.unwrap().balance_weight - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_sample_per_class_has_zero_intra_scatter() {
        let f = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0], [0.0, 1.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 1, 2]).unwrap();
        let s = compute_scatter(&d).unwrap();
        assert_eq!(s.s_w_total, Matrix::zeros(2, 2));
        assert!(s.binary.is_none());
    }

    #[test]
    fn single_class_is_rejected() {
        let f = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        let d = LabeledDataset::new(f, vec![0, 0]).unwrap();
        assert!(matches!(compute_scatter(&d), Err(Error::NeedTwoClasses)));
    }

    #[test]
    fn scatter_matrices_are_psd_and_low_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (n, m, c) = (30, 8, 3);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let labels = (0..n).map(|i| i % c).collect();
        let d = LabeledDataset::new(Matrix::from_rows(&rows).unwrap(), labels).unwrap();
        let s = compute_scatter(&d).unwrap();
        let w = sym_eig(&s.s_w_total).unwrap();
        assert!(*w.eigenvalues.last().unwrap() >= -1e-9 * s.s_w_total.frobenius_norm());
        let sv = svd_decompose(&s.s_b_total).unwrap().singular_values;
        assert!(sv[c..].iter().all(|&x| x <= 1e-9 * sv[0]));
    }
}
