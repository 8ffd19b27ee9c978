//! Supervised NMF for two-class problems.
//!
//! Objective, with `z_i = [1, (X y_i)ᵀ]` and `a_i = z_iᵀ β`:
//!
//! ```text
//! ½‖Y − KX‖²_F + (λ/N) Σ_i ( log(1 + exp(a_i)) − u_i a_i )
//! ```
//!
//! Each iteration applies the multiplicative K-update, an ADADELTA step on X followed by
//! replacing negative entries of X with [`PROJECTION_FLOOR`], then an ADADELTA step on β.
//! Gradients are full-batch.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adadelta::{AdadeltaParams, AdadeltaState};
use super::nmf::{
    check_nonnegative, check_rank, init_scale, random_factor, trace_csv, update_coefficients,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Value written over negative entries of X after each ADADELTA step.
pub const PROJECTION_FLOOR: f64 = 1e-8;
pub const DEFAULT_LAMBDA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnmfConfig {
    pub rank: usize,
    pub lambda_reg: f64,
    pub iters: usize,
    pub seed: u64,
    pub adadelta: AdadeltaParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnmfModel {
    pub k: Matrix,
    pub x: Matrix,
    pub rank: usize,
    pub seed: u64,
    /// β: intercept followed by p weights.
    pub logit_coefficients: Vec<f64>,
    pub lambda_reg: f64,
    /// Total objective after each iteration.
    pub loss_trace: Vec<f64>,
    /// Logistic part (λ/N)Σ(...) after each iteration.
    pub logistic_trace: Vec<f64>,
    /// ‖Y − KX‖_F after each iteration.
    pub error_trace: Vec<f64>,
    pub adadelta: AdadeltaParams,
    pub iters: usize,
}

/// The two parts of the supervised objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnmfLoss {
    /// ½‖Y − KX‖²_F
    pub frobenius: f64,
    /// (λ/N) Σ (softplus(a_i) − u_i a_i)
    pub logistic: f64,
}

impl SnmfLoss {
    pub fn total(&self) -> f64 {
        self.frobenius + self.logistic
    }
}

fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Logits a_i = β₀ + β_{1:p}ᵀ X y_i for every sample.
fn logits(y: &DMatrix<f64>, x: &DMatrix<f64>, beta: &DVector<f64>) -> DVector<f64> {
    let p = x.nrows();
    let z = y * x.transpose();
    let w = beta.rows(1, p);
    DVector::from_fn(y.nrows(), |i, _| beta[0] + z.row(i).transpose().dot(&w))
}

fn check_shapes(y: &DMatrix<f64>, u: &[f64], k: &DMatrix<f64>, x: &DMatrix<f64>, beta: &[f64]) -> Result<()> {
    let p = x.nrows();
    if u.len() != y.nrows()
        || k.shape() != (y.nrows(), p)
        || x.ncols() != y.ncols()
        || beta.len() != p + 1
    {
        return Err(Error::invalid(format!(
            "SNMF shapes do not conform: Y{:?} u[{}] K{:?} X{:?} beta[{}]",
            y.shape(),
            u.len(),
            k.shape(),
            x.shape(),
            beta.len()
        )));
    }
    Ok(())
}

fn loss_parts(
    y: &DMatrix<f64>,
    u: &[f64],
    k: &DMatrix<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    lambda: f64,
) -> SnmfLoss {
    let frobenius = 0.5 * (y - k * x).norm_squared();
    let a = logits(y, x, beta);
    let sum: f64 = a.iter().zip(u).map(|(a, u)| softplus(*a) - u * a).sum();
    SnmfLoss {
        frobenius,
        logistic: lambda / y.nrows() as f64 * sum,
    }
}

fn grad_x(
    y: &DMatrix<f64>,
    u: &[f64],
    k: &DMatrix<f64>,
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    lambda: f64,
) -> DMatrix<f64> {
    let p = x.nrows();
    let resid = y - k * x;
    let mut g = -k.tr_mul(&resid);
    if lambda != 0.0 {
        let a = logits(y, x, beta);
        let r = DVector::from_fn(y.nrows(), |i, _| sigmoid(a[i]) - u[i]);
        // Σ_i r_i y_iᵀ, scaled and spread over the rows of X by β_{1:p}.
        let ry = y.tr_mul(&r).transpose();
        let w = beta.rows(1, p);
        g += (w * ry) * (lambda / y.nrows() as f64);
    }
    g
}

fn grad_beta(
    y: &DMatrix<f64>,
    u: &[f64],
    x: &DMatrix<f64>,
    beta: &DVector<f64>,
    lambda: f64,
) -> DVector<f64> {
    let p = x.nrows();
    let mut g = DVector::zeros(p + 1);
    if lambda == 0.0 {
        return g;
    }
    let a = logits(y, x, beta);
    let z = y * x.transpose();
    let scale = lambda / y.nrows() as f64;
    for i in 0..y.nrows() {
        let r = sigmoid(a[i]) - u[i];
        g[0] += r;
        for j in 0..p {
            g[j + 1] += r * z[(i, j)];
        }
    }
    g * scale
}

/// Evaluates the supervised objective at (K, X, β).
pub fn snmf_objective(
    y: &Matrix,
    u: &[f64],
    k: &Matrix,
    x: &Matrix,
    beta: &[f64],
    lambda_reg: f64,
) -> Result<SnmfLoss> {
    let (y, k, x) = (y.as_dmatrix(), k.as_dmatrix(), x.as_dmatrix());
    check_shapes(y, u, k, x, beta)?;
    Ok(loss_parts(y, u, k, x, &DVector::from_column_slice(beta), lambda_reg))
}

/// Analytic gradients of the objective with respect to X (p×M) and β (p+1).
pub fn snmf_gradients(
    y: &Matrix,
    u: &[f64],
    k: &Matrix,
    x: &Matrix,
    beta: &[f64],
    lambda_reg: f64,
) -> Result<(Matrix, Vec<f64>)> {
    let (y, k, x) = (y.as_dmatrix(), k.as_dmatrix(), x.as_dmatrix());
    check_shapes(y, u, k, x, beta)?;
    let beta = DVector::from_column_slice(beta);
    let gx = grad_x(y, u, k, x, &beta, lambda_reg);
    let gb = grad_beta(y, u, x, &beta, lambda_reg);
    Ok((Matrix::from_dmatrix(gx), gb.iter().copied().collect()))
}

/// Replaces negative entries with [`PROJECTION_FLOOR`].
pub fn project_nonnegative(x: &mut Matrix) {
    let mut m = std::mem::replace(x, Matrix::zeros(1, 1)).into_dmatrix();
    project_in_place(&mut m);
    *x = Matrix::from_dmatrix(m);
}

fn project_in_place(x: &mut DMatrix<f64>) {
    x.apply(|v| {
        if *v < 0.0 {
            *v = PROJECTION_FLOOR;
        }
    });
}

fn binary_labels(labels: &[usize]) -> Result<Vec<f64>> {
    labels
        .iter()
        .map(|&l| match l {
            0 => Ok(0.0),
            1 => Ok(1.0),
            _ => Err(Error::NotBinary(l + 1)),
        })
        .collect()
}

/// Fits the supervised factorization. `labels` must be 0/1.
pub fn snmf_fit(y: &Matrix, labels: &[usize], cfg: &SnmfConfig) -> Result<SnmfModel> {
    let u = binary_labels(labels)?;
    let yd = y.as_dmatrix();
    if u.len() != yd.nrows() {
        return Err(Error::invalid(format!(
            "{} labels for {} samples",
            u.len(),
            yd.nrows()
        )));
    }
    check_nonnegative(yd)?;
    let p = cfg.rank;
    check_rank(yd, p)?;
    if cfg.iters == 0 {
        return Err(Error::invalid("iteration count must be >= 1"));
    }
    if !(cfg.lambda_reg >= 0.0 && cfg.lambda_reg.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda_reg must be non-negative, got {}",
            cfg.lambda_reg
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = init_scale(yd, p);
    let mut k = random_factor(yd.nrows(), p, scale, &mut rng);
    let mut x = random_factor(p, yd.ncols(), scale, &mut rng);
    let mut beta = DVector::zeros(p + 1);
    let mut x_opt = AdadeltaState::new(p, yd.ncols(), cfg.adadelta)?;
    let mut beta_opt = AdadeltaState::new(p + 1, 1, cfg.adadelta)?;

    let mut loss_trace = Vec::with_capacity(cfg.iters);
    let mut logistic_trace = Vec::with_capacity(cfg.iters);
    let mut error_trace = Vec::with_capacity(cfg.iters);
    for _ in 0..cfg.iters {
        update_coefficients(&mut k, yd, &x);

        let gx = grad_x(yd, &u, &k, &x, &beta, cfg.lambda_reg);
        x += x_opt.step(&gx)?;
        project_in_place(&mut x);

        let gb = grad_beta(yd, &u, &x, &beta, cfg.lambda_reg);
        let step = beta_opt.step(&DMatrix::from_column_slice(p + 1, 1, gb.as_slice()))?;
        beta += step.column(0);

        let loss = loss_parts(yd, &u, &k, &x, &beta, cfg.lambda_reg);
        loss_trace.push(loss.total());
        logistic_trace.push(loss.logistic);
        error_trace.push((2.0 * loss.frobenius).sqrt());
    }

    Ok(SnmfModel {
        k: Matrix::from_dmatrix(k),
        x: Matrix::from_dmatrix(x),
        rank: p,
        seed: cfg.seed,
        logit_coefficients: beta.iter().copied().collect(),
        lambda_reg: cfg.lambda_reg,
        loss_trace,
        logistic_trace,
        error_trace,
        adadelta: cfg.adadelta,
        iters: cfg.iters,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnmfFile {
    kind: String,
    rank: usize,
    seed: u64,
    iters: usize,
    lambda_reg: f64,
    adadelta: AdadeltaParams,
    logit_coefficients: Vec<f64>,
    final_error: f64,
    final_loss: f64,
    k: Matrix,
    x: Matrix,
}

impl SnmfModel {
    pub fn final_error(&self) -> f64 {
        self.error_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// Probability of label 1 under the logistic head σ(zᵀβ), z = [1, X y].
    pub fn predict_proba(&self, samples: &Matrix) -> Result<Vec<f64>> {
        if samples.cols() != self.x.cols() {
            return Err(Error::invalid(format!(
                "samples have {} columns, model expects {}",
                samples.cols(),
                self.x.cols()
            )));
        }
        let beta = DVector::from_column_slice(&self.logit_coefficients);
        let a = logits(samples.as_dmatrix(), self.x.as_dmatrix(), &beta);
        Ok(a.iter().map(|v| sigmoid(*v)).collect())
    }

    /// Hard labels from the logistic head at threshold 1/2.
    pub fn predict_logistic(&self, samples: &Matrix) -> Result<Vec<usize>> {
        Ok(self
            .predict_proba(samples)?
            .into_iter()
            .map(|p| usize::from(p > 0.5))
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SnmfFile {
            kind: "snmf".into(),
            rank: self.rank,
            seed: self.seed,
            iters: self.iters,
            lambda_reg: self.lambda_reg,
            adadelta: self.adadelta,
            logit_coefficients: self.logit_coefficients.clone(),
            final_error: self.final_error(),
            final_loss: self.loss_trace.last().copied().unwrap_or(f64::NAN),
            k: self.k.clone(),
            x: self.x.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: SnmfFile = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("SNMF model JSON: {e}")))?;
        if f.kind != "snmf"
            || f.k.cols() != f.rank
            || f.x.rows() != f.rank
            || f.logit_coefficients.len() != f.rank + 1
        {
            return Err(Error::invalid("SNMF model JSON: inconsistent kind or shapes"));
        }
        Ok(SnmfModel {
            k: f.k,
            x: f.x,
            rank: f.rank,
            seed: f.seed,
            logit_coefficients: f.logit_coefficients,
            lambda_reg: f.lambda_reg,
            loss_trace: vec![f.final_loss],
            logistic_trace: Vec::new(),
            error_trace: vec![f.final_error],
            adadelta: f.adadelta,
            iters: f.iters,
        })
    }

    pub fn trace_csv(&self) -> String {
        trace_csv(&self.loss_trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cfg(rank: usize, lambda: f64, iters: usize) -> SnmfConfig {
        SnmfConfig {
            rank,
            lambda_reg: lambda,
            iters,
            seed: 3,
            adadelta: AdadeltaParams::default(),
        }
    }

    fn random_nonneg(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.random_range(0.0..1.0)).collect();
        Matrix::from_row_major(rows, cols, data).unwrap()
    }

    /// Two classes on disjoint feature supports.
    fn separable(n_per: usize, m: usize, rng: &mut ChaCha8Rng) -> (Matrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            for _ in 0..n_per {
                rows.push(
                    (0..m)
                        .map(|j| {
                            if (j < m / 2) == (class == 0) {
                                rng.random_range(0.5..1.5)
                            } else {
                                0.0
                            }
                        })
                        .collect::<Vec<_>>(),
                );
                labels.push(class);
            }
        }
        (Matrix::from_rows(&rows).unwrap(), labels)
    }

    #[test]
    fn zero_lambda_leaves_beta_untouched() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_nonneg(10, 6, &mut rng);
        let labels: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let m = snmf_fit(&y, &labels, &cfg(2, 0.0, 200)).unwrap();
        assert_eq!(m.logit_coefficients, vec![0.0; 3]);
        assert!(m.logistic_trace.iter().all(|v| *v == 0.0));
        for (l, e) in m.loss_trace.iter().zip(&m.error_trace) {
            assert!((l - 0.5 * e * e).abs() <= 1e-12 * l.max(1.0));
        }
    }

    #[test]
    fn zero_lambda_follows_nmf_k_update_with_adadelta_x() {
        // Replays the schedule by hand: K multiplicative update, ADADELTA on the
        // Frobenius gradient, projection.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y = random_nonneg(8, 5, &mut rng);
        let labels: Vec<usize> = (0..8).map(|i| i % 2).collect();
        let c = cfg(2, 0.0, 30);
        let m = snmf_fit(&y, &labels, &c).unwrap();

        let yd = y.as_dmatrix();
        let mut r = ChaCha8Rng::seed_from_u64(c.seed);
        let s = init_scale(yd, 2);
        let mut k = random_factor(8, 2, s, &mut r);
        let mut x = random_factor(2, 5, s, &mut r);
        let mut opt = AdadeltaState::new(2, 5, c.adadelta).unwrap();
        for e in &m.error_trace {
            update_coefficients(&mut k, yd, &x);
            let g = -k.tr_mul(&(yd - &k * &x));
            x += opt.step(&g).unwrap();
            project_in_place(&mut x);
            assert_eq!((yd - &k * &x).norm(), *e);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let y = random_nonneg(6, 4, &mut rng);
        let k = random_nonneg(6, 2, &mut rng);
        let x = random_nonneg(2, 4, &mut rng);
        let u = [0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
        let beta = [0.3, -0.7, 0.5];
        let (gx, gb) = snmf_gradients(&y, &u, &k, &x, &beta, 1.0).unwrap();
        let h = 1e-5;
        let f = |x: &Matrix, b: &[f64]| snmf_objective(&y, &u, &k, x, b, 1.0).unwrap().total();
        let mut num = Vec::new();
        let mut ana = Vec::new();
        for i in 0..2 {
            for j in 0..4 {
                let mut plus = x.as_dmatrix().clone();
                let mut minus = plus.clone();
                plus[(i, j)] += h;
                minus[(i, j)] -= h;
                num.push((f(&Matrix::from_dmatrix(plus), &beta) - f(&Matrix::from_dmatrix(minus), &beta)) / (2.0 * h));
                ana.push(gx[(i, j)]);
            }
        }
        for j in 0..3 {
            let mut plus = beta;
            let mut minus = beta;
            plus[j] += h;
            minus[j] -= h;
            num.push((f(&x, &plus) - f(&x, &minus)) / (2.0 * h));
            ana.push(gb[j]);
        }
        let diff: f64 = num.iter().zip(&ana).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = num.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(diff / norm <= 1e-4, "{diff} / {norm}");
    }

    #[test]
    fn separable_data_drives_logistic_loss_down() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (y, labels) = separable(15, 8, &mut rng);
        let m = snmf_fit(&y, &labels, &cfg(2, 1.0, 3000)).unwrap();
        let first = m.logistic_trace[0];
        let last = *m.logistic_trace.last().unwrap();
        assert!(last <= 0.5 * first, "{first} -> {last}");
        assert!(m.k.min_entry() >= 0.0 && m.x.min_entry() >= 0.0);
        let pred = m.predict_logistic(&y).unwrap();
        assert_eq!(pred, labels);
    }

    #[test]
    fn projection_is_idempotent() {
        let mut x = Matrix::from_rows(&[[-1.0, 0.0, 2.0], [1e-9, -1e-20, 3.0]]).unwrap();
        project_nonnegative(&mut x);
        let once = x.clone();
        project_nonnegative(&mut x);
        assert_eq!(x, once);
        assert_eq!(once[(0, 0)], PROJECTION_FLOOR);
        assert_eq!(once[(1, 1)], PROJECTION_FLOOR);
        assert_eq!(once[(0, 1)], 0.0);
    }

    #[test]
    fn label_and_input_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y = random_nonneg(6, 4, &mut rng);
        assert!(matches!(
            snmf_fit(&y, &[0, 1, 2, 0, 1, 0], &cfg(2, 1.0, 5)),
            Err(Error::NotBinary(_))
        ));
        let neg = Matrix::from_rows(&[[1.0, -1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 2.0]]).unwrap();
        assert!(matches!(
            snmf_fit(&neg, &[0, 1, 0], &cfg(1, 1.0, 5)),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn deterministic_and_serializable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (y, labels) = separable(4, 6, &mut rng);
        let a = snmf_fit(&y, &labels, &cfg(2, 1.0, 40)).unwrap();
        let b = snmf_fit(&y, &labels, &cfg(2, 1.0, 40)).unwrap();
        assert_eq!(a, b);
        let back = SnmfModel::from_json(&a.to_json()).unwrap();
        assert_eq!(back.logit_coefficients, a.logit_coefficients);
        assert_eq!(back.x, a.x);
    }
}
