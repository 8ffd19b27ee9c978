use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Floor applied to every multiplicative-update denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;
/// Default number of multiplicative-update rounds.
pub const DEFAULT_ITERS: usize = 3000;

/// Y ≈ K X with K (N×p) and X (p×M) non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfModel {
    pub k: Matrix,
    pub x: Matrix,
    pub rank: usize,
    /// ‖Y − KX‖_F after each round.
    pub error_trace: Vec<f64>,
    pub seed: u64,
    /// Update rounds used to fit; reused when transforming new samples.
    pub iters: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NmfFile {
    kind: String,
    rank: usize,
    seed: u64,
    iters: usize,
    final_error: f64,
    k: Matrix,
    x: Matrix,
}

impl NmfModel {
    pub fn final_error(&self) -> f64 {
        self.error_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// JSON with rank, seed, iteration count, final error and the row-major factors.
    /// The error trace is written separately by [`NmfModel::trace_csv`].
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&NmfFile {
            kind: "nmf".into(),
            rank: self.rank,
            seed: self.seed,
            iters: self.iters,
            final_error: self.final_error(),
            k: self.k.clone(),
            x: self.x.clone(),
        })
        .expect("model serializes")
    }

    /// Restores factors, rank and seed; the trace holds only the final error.
    pub fn from_json(text: &str) -> Result<Self> {
        let f: NmfFile =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("NMF model JSON: {e}")))?;
        if f.kind != "nmf" || f.k.cols() != f.rank || f.x.rows() != f.rank {
            return Err(Error::invalid("NMF model JSON: inconsistent kind or shapes"));
        }
        Ok(NmfModel {
            k: f.k,
            x: f.x,
            rank: f.rank,
            error_trace: vec![f.final_error],
            seed: f.seed,
            iters: f.iters,
        })
    }

    pub fn trace_csv(&self) -> String {
        trace_csv(&self.error_trace)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Two-column `iteration,error` CSV with 17 significant digits.
pub(crate) fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,error\n");
    for (i, e) in trace.iter().enumerate() {
        let _ = writeln!(out, "{},{:.16e}", i + 1, e);
    }
    out
}

pub(crate) fn check_nonnegative(y: &DMatrix<f64>) -> Result<()> {
    for j in 0..y.ncols() {
        for i in 0..y.nrows() {
            let v = y[(i, j)];
            if v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_rank(y: &DMatrix<f64>, p: usize) -> Result<()> {
    let limit = y.nrows().min(y.ncols());
    if p == 0 || p >= limit {
        return Err(Error::invalid(format!(
            "factorization rank must satisfy 1 <= p < {limit}, got {p}"
        )));
    }
    Ok(())
}

/// Uniform (0, 1] entries scaled by √(mean(Y)/p).
pub(crate) fn random_factor(rows: usize, cols: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // Column-major fill order is part of the reproducibility contract.
    DMatrix::from_fn(rows, cols, |_, _| (1.0 - rng.random::<f64>()) * scale)
}

pub(crate) fn init_scale(y: &DMatrix<f64>, p: usize) -> f64 {
    (y.mean() / p as f64).sqrt()
}

/// K ← K ⊙ (Y Xᵀ) / (K X Xᵀ)
pub(crate) fn update_coefficients(k: &mut DMatrix<f64>, y: &DMatrix<f64>, x: &DMatrix<f64>) {
    let num = y * x.transpose();
    let den = &*k * (x * x.transpose());
    k.zip_zip_apply(&num, &den, |kv, n, d| *kv *= n / d.max(DENOMINATOR_FLOOR));
}

/// X ← X ⊙ (Kᵀ Y) / (Kᵀ K X)
pub(crate) fn update_basis(x: &mut DMatrix<f64>, y: &DMatrix<f64>, k: &DMatrix<f64>) {
    let num = k.tr_mul(y);
    let den = k.tr_mul(k) * &*x;
    x.zip_zip_apply(&num, &den, |xv, n, d| *xv *= n / d.max(DENOMINATOR_FLOOR));
}

pub(crate) fn frobenius_residual(y: &DMatrix<f64>, k: &DMatrix<f64>, x: &DMatrix<f64>) -> f64 {
    (y - k * x).norm()
}

/// Fits Y ≈ K X by `iters` rounds of alternating multiplicative updates (K, then X).
pub fn nmf_fit(y: &Matrix, p: usize, iters: usize, seed: u64) -> Result<NmfModel> {
    let y = y.as_dmatrix();
    check_nonnegative(y)?;
    check_rank(y, p)?;
    if iters == 0 {
        return Err(Error::invalid("iteration count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = init_scale(y, p);
    let mut k = random_factor(y.nrows(), p, scale, &mut rng);
    let mut x = random_factor(p, y.ncols(), scale, &mut rng);
    let mut error_trace = Vec::with_capacity(iters);
    for _ in 0..iters {
        update_coefficients(&mut k, y, &x);
        update_basis(&mut x, y, &k);
        error_trace.push(frobenius_residual(y, &k, &x));
    }
    Ok(NmfModel {
        k: Matrix::from_dmatrix(k),
        x: Matrix::from_dmatrix(x),
        rank: p,
        error_trace,
        seed,
        iters,
    })
}

/// Coefficients of `samples` in a fixed basis `x`: the K-update alone, run for `iters`
/// rounds from a seeded positive start.
pub fn nmf_transform(x: &Matrix, samples: &Matrix, iters: usize, seed: u64) -> Result<Matrix> {
    let (xm, y) = (x.as_dmatrix(), samples.as_dmatrix());
    if y.ncols() != xm.ncols() {
        return Err(Error::invalid(format!(
            "samples have {} columns, basis has {}",
            y.ncols(),
            xm.ncols()
        )));
    }
    check_nonnegative(y)?;
    check_nonnegative(xm)?;
    let p = xm.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k = random_factor(y.nrows(), p, init_scale(y, p).max(f64::MIN_POSITIVE), &mut rng);
    for _ in 0..iters {
        update_coefficients(&mut k, y, xm);
    }
    Ok(Matrix::from_dmatrix(k))
}

/// ‖Y − K X‖_F
pub fn reconstruction_error(k: &Matrix, x: &Matrix, y: &Matrix) -> Result<f64> {
    if k.cols() != x.rows() || k.rows() != y.rows() || x.cols() != y.cols() {
        return Err(Error::invalid(format!(
            "shapes K{:?} X{:?} Y{:?} do not conform",
            k.shape(),
            x.shape(),
            y.shape()
        )));
    }
    Ok(frobenius_residual(y.as_dmatrix(), k.as_dmatrix(), x.as_dmatrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_nonneg(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.random_range(0.0..1.0)).collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    #[test]
    fn rank_one_converges() {
        let y = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let m = nmf_fit(&y, 1, DEFAULT_ITERS, 0).unwrap();
        assert!(m.final_error() <= 1e-6, "{}", m.final_error());
        assert_eq!(m.error_trace.len(), DEFAULT_ITERS);
    }

    #[test]
    fn error_trace_is_monotone_on_random_input() {
        let y = random_nonneg(20, 10, 1);
        let m = nmf_fit(&y, 3, DEFAULT_ITERS, 7).unwrap();
        assert!(m.error_trace.windows(2).all(|w| w[1] <= w[0] + 1e-10));
        assert!(m.k.min_entry() >= 0.0 && m.x.min_entry() >= 0.0);
    }

    #[test]
    fn precondition_errors() {
        let y = Matrix::from_rows(&[[1.0, -0.5], [0.0, 1.0]]).unwrap();
        assert!(matches!(nmf_fit(&y, 1, 10, 0), Err(Error::NegativeEntry { .. })));
        let y = random_nonneg(4, 3, 2);
        assert!(matches!(nmf_fit(&y, 3, 10, 0), Err(Error::InvalidInput(_))));
        assert!(matches!(nmf_fit(&y, 0, 10, 0), Err(Error::InvalidInput(_))));
        assert!(nmf_fit(&y, 1, 0, 0).is_err());
    }

    #[test]
    fn fit_is_bitwise_deterministic() {
        let y = random_nonneg(8, 6, 3);
        assert_eq!(nmf_fit(&y, 2, 50, 11).unwrap(), nmf_fit(&y, 2, 50, 11).unwrap());
        assert_ne!(nmf_fit(&y, 2, 50, 11).unwrap().k, nmf_fit(&y, 2, 50, 12).unwrap().k);
    }

    #[test]
    fn transform_of_training_rows_matches_fit() {
        let y = random_nonneg(15, 8, 4);
        let m = nmf_fit(&y, 3, DEFAULT_ITERS, 5).unwrap();
        let k = nmf_transform(&m.x, &y, DEFAULT_ITERS, 6).unwrap();
        let err = reconstruction_error(&k, &m.x, &y).unwrap();
        assert!(err <= 2.0 * m.final_error(), "{err} vs {}", m.final_error());
    }

    #[test]
    fn transform_of_zero_row_vanishes() {
        let x = random_nonneg(3, 5, 8);
        let samples = Matrix::zeros(1, 5);
        let k = nmf_transform(&x, &samples, DEFAULT_ITERS, 1).unwrap();
        assert!(k.frobenius_norm() <= 1e-8);
    }

    #[test]
    fn transform_recovers_one_hot_for_disjoint_basis() {
        let x = Matrix::from_rows(&[
            [1.0, 2.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 3.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 1.0],
        ])
        .unwrap();
        let sample = Matrix::from_rows(&[x.row(1)]).unwrap();
        let k = nmf_transform(&x, &sample, DEFAULT_ITERS, 3).unwrap().row(0);

        // Oracle: brute-force NNLS over a grid on the 3-dim coefficient simplex scale.
        let mut best = (f64::INFINITY, [0.0; 3]);
        for a in 0..=20 {
            for b in 0..=20 {
                for c in 0..=20 {
                    let coef = [a as f64 / 10.0, b as f64 / 10.0, c as f64 / 10.0];
                    let mut r = 0.0;
                    for j in 0..6 {
                        let v: f64 = (0..3).map(|i| coef[i] * x[(i, j)]).sum();
                        r += (v - sample[(0, j)]).powi(2);
                    }
                    if r < best.0 {
                        best = (r, coef);
                    }
                }
            }
        }
        assert_eq!(best.1, [0.0, 1.0, 0.0]);
        let dot: f64 = k.iter().zip(&best.1).map(|(a, b)| a * b).sum();
        let cos = dot / (k.iter().map(|v| v * v).sum::<f64>().sqrt());
        assert!(cos >= 0.99, "{k:?}");
    }

    #[test]
    fn reconstruction_error_cases() {
        let k = random_nonneg(4, 2, 1);
        let x = random_nonneg(2, 3, 2);
        let y = k.matmul(&x).unwrap();
        assert!(reconstruction_error(&k, &x, &y).unwrap() <= 1e-15);
        let zero = Matrix::zeros(4, 2);
        assert_eq!(reconstruction_error(&zero, &x, &y).unwrap(), y.frobenius_norm());

        let target = random_nonneg(4, 3, 3);
        let got = reconstruction_error(&k, &x, &target).unwrap();
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..3 {
                let kx: f64 = (0..2).map(|r| k[(i, r)] * x[(r, j)]).sum();
                sum += (target[(i, j)] - kx).powi(2);
            }
        }
        assert!((got - sum.sqrt()).abs() <= 1e-12 * got);
        assert!(reconstruction_error(&k, &x, &Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn nested_rank_does_not_increase_error() {
        // Rank p+1 started from the rank-p solution padded with a small positive column/row.
        let y = random_nonneg(10, 7, 9);
        let small = nmf_fit(&y, 2, 500, 1).unwrap();
        let mut k = small.k.as_dmatrix().clone().insert_column(2, 1e-3);
        let mut x = small.x.as_dmatrix().clone().insert_row(2, 1e-3);
        let yd = y.as_dmatrix();
        for _ in 0..500 {
            update_coefficients(&mut k, yd, &x);
            update_basis(&mut x, yd, &k);
        }
        assert!(frobenius_residual(yd, &k, &x) <= small.final_error() + 1e-8);
    }

    #[test]
    fn json_round_trip() {
        let y = random_nonneg(6, 5, 1);
        let m = nmf_fit(&y, 2, 20, 4).unwrap();
        let back = NmfModel::from_json(&m.to_json()).unwrap();
        assert_eq!((back.k, back.x, back.rank, back.seed), (m.k.clone(), m.x.clone(), 2, 4));
        assert!(m.trace_csv().starts_with("iteration,error\n1,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn factors_stay_nonnegative(seed in any::<u64>(), n in 3usize..8, m in 3usize..8, iters in 1usize..40) {
            let y = random_nonneg(n, m, seed);
            let model = nmf_fit(&y, 2, iters, seed ^ 1).unwrap();
            prop_assert!(model.k.min_entry() >= 0.0);
            prop_assert!(model.x.min_entry() >= 0.0);
        }
    }
}
