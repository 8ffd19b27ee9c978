//! K-nearest-neighbour classification, accuracy and the two-sample Z-test.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
}

/// Neighbour counts whose accuracies are averaged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnnConfig {
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub metric: Metric,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig {
            k_values: vec![1, 5, 10, 15],
            metric: Metric::Euclidean,
        }
    }
}

impl KnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() {
            return Err(Error::invalid("k_values must not be empty"));
        }
        if self.k_values[0] == 0 {
            return Err(Error::invalid("every k must be >= 1"));
        }
        if !self.k_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("k_values must be strictly increasing"));
        }
        Ok(())
    }

    pub fn max_k(&self) -> usize {
        self.k_values.iter().copied().max().unwrap_or(0)
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn check_inputs(train: &Matrix, train_labels: &[usize], test: &Matrix, k: usize) -> Result<()> {
    if train_labels.len() != train.rows() {
        return Err(Error::invalid(format!(
            "{} training labels for {} training rows",
            train_labels.len(),
            train.rows()
        )));
    }
    if train.cols() != test.cols() {
        return Err(Error::invalid(format!(
            "train has {} features, test has {}",
            train.cols(),
            test.cols()
        )));
    }
    if k == 0 || k > train.rows() {
        return Err(Error::invalid(format!(
            "k = {k} must be in 1..={}",
            train.rows()
        )));
    }
    Ok(())
}

/// Training rows sorted by (distance, row index) for each test row.
fn neighbour_order(train: &Matrix, test: &Matrix) -> Vec<Vec<(f64, usize)>> {
    let train_rows: Vec<Vec<f64>> = (0..train.rows()).map(|i| train.row(i)).collect();
    (0..test.rows())
        .map(|t| {
            let q = test.row(t);
            let mut d: Vec<(f64, usize)> = train_rows
                .iter()
                .enumerate()
                .map(|(i, r)| (euclidean(&q, r), i))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d
        })
        .collect()
}

/// Majority vote among the `k` nearest; ties go to the smaller summed distance, then to
/// the smaller class index.
fn vote(sorted: &[(f64, usize)], labels: &[usize], k: usize) -> usize {
    let classes = sorted[..k].iter().map(|(_, i)| labels[*i]).max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; classes];
    let mut dist = vec![0.0f64; classes];
    for &(d, i) in &sorted[..k] {
        counts[labels[i]] += 1;
        dist[labels[i]] += d;
    }
    (0..classes)
        .filter(|&c| counts[c] > 0)
        .min_by(|&a, &b| {
            counts[b]
                .cmp(&counts[a])
                .then(dist[a].total_cmp(&dist[b]))
                .then(a.cmp(&b))
        })
        .expect("k >= 1")
}

pub fn knn_predict(
    train: &Matrix,
    train_labels: &[usize],
    test: &Matrix,
    k: usize,
) -> Result<Vec<usize>> {
    check_inputs(train, train_labels, test, k)?;
    Ok(neighbour_order(train, test)
        .iter()
        .map(|s| vote(s, train_labels, k))
        .collect())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("accuracy of an empty prediction set"));
    }
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Mean KNN accuracy over every k in `cfg`. Neighbours are sorted once per test row.
pub fn mean_accuracy_over_k(
    train: &Matrix,
    train_labels: &[usize],
    test: &Matrix,
    test_labels: &[usize],
    cfg: &KnnConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_inputs(train, train_labels, test, cfg.max_k())?;
    let order = neighbour_order(train, test);
    let mut total = 0.0;
    for &k in &cfg.k_values {
        let pred: Vec<usize> = order.iter().map(|s| vote(s, train_labels, k)).collect();
        total += accuracy(&pred, test_labels)?;
    }
    Ok(total / cfg.k_values.len() as f64)
}

/// Two-sample unpooled Z statistic and its two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
}

fn mean_and_unbiased_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// z = (mean_a − mean_b)/√(var_a/n_a + var_b/n_b), p = 2(1 − Φ(|z|)).
///
/// With zero variance in both samples the statistic degenerates: equal means give
/// z = 0, p = 1, unequal means give z = ±∞, p = 0.
pub fn z_test(a: &[f64], b: &[f64]) -> Result<ZTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("z_test needs at least two values per sample"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("z_test samples must be finite"));
    }
    let (ma, va) = mean_and_unbiased_var(a);
    let (mb, vb) = mean_and_unbiased_var(b);
    let se2 = va / a.len() as f64 + vb / b.len() as f64;
    let diff = ma - mb;
    if se2 == 0.0 {
        return Ok(if diff == 0.0 {
            ZTest { z: 0.0, p: 1.0 }
        } else {
            ZTest {
                z: f64::INFINITY.copysign(diff),
                p: 0.0,
            }
        });
    }
    let z = diff / se2.sqrt();
    let p = libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    Ok(ZTest { z, p })
}
