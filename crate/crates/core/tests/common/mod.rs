#![allow(dead_code)]

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - r.random::<f64>();
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| gaussian(r)).collect();
    Matrix::from_row_major(rows, cols, data).unwrap()
}

pub fn dataset(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> LabeledDataset {
    let m = rows[0].len();
    let n = rows.len();
    let data = rows.into_iter().flatten().collect();
    LabeledDataset::new(Matrix::from_row_major(n, m, data).unwrap(), labels).unwrap()
}

/// Four classes whose means differ only on axes 0..3 (tetrahedron vertices, unit variance
/// per axis); axes 3..53 carry noise with 25× that variance; the rest carry small noise.
pub fn drowned_signal(per_class: usize, dims: usize, seed: u64) -> LabeledDataset {
    let mut r = rng(seed);
    let vertices = [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, v) in vertices.iter().enumerate() {
        for _ in 0..per_class {
            let row: Vec<f64> = (0..dims)
                .map(|j| match j {
                    0..3 => v[j] + 0.5 * gaussian(&mut r),
                    3..53 => 5.0 * gaussian(&mut r),
                    _ => 0.1 * gaussian(&mut r),
                })
                .collect();
            rows.push(row);
            labels.push(c);
        }
    }
    dataset(rows, labels)
}

/// Non-negative mixtures of `atoms` random non-negative atoms plus a little uniform noise.
/// Atom `a` is weighted `contrast` times more heavily in class `a % classes`.
pub fn nonnegative_mixture(
    classes: usize,
    per_class: usize,
    dims: usize,
    atoms: usize,
    contrast: f64,
    seed: u64,
) -> LabeledDataset {
    let mut r = rng(seed);
    let basis: Vec<Vec<f64>> = (0..atoms)
        .map(|_| (0..dims).map(|_| r.random::<f64>().powi(3)).collect())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..classes {
        for _ in 0..per_class {
            let mut row = vec![0.0; dims];
            for (a, atom) in basis.iter().enumerate() {
                let boost = if a % classes == c { contrast } else { 1.0 };
                let w = boost * r.random::<f64>();
                for (x, b) in row.iter_mut().zip(atom) {
                    *x += w * b;
                }
            }
            for x in &mut row {
                *x += 0.05 * r.random::<f64>();
            }
            rows.push(row);
            labels.push(c);
        }
    }
    dataset(rows, labels)
}

/// Spearman rank correlation (no ties expected in the x values; y ties get average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                out[k] = avg;
            }
            i = j + 1;
        }
        out
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Two classes differing on the first `signal` axes, which have distinct scales
/// `decay^j`. Class 1 is shifted by `shift·scale` and spread `spread` times wider there.
/// Remaining axes carry identical noise of scale `noise`.
#[allow(clippy::too_many_arguments)]
pub fn widened_binary(
    per_class: usize,
    dims: usize,
    signal: usize,
    decay: f64,
    shift: f64,
    spread: f64,
    noise: f64,
    seed: u64,
) -> LabeledDataset {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..per_class {
            let row = (0..dims)
                .map(|j| {
                    if j < signal {
                        let s = decay.powi(j as i32);
                        if c == 0 {
                            s * gaussian(&mut r)
                        } else {
                            s * (shift + spread * gaussian(&mut r))
                        }
                    } else {
                        noise * gaussian(&mut r)
                    }
                })
                .collect();
            rows.push(row);
            labels.push(c);
        }
    }
    dataset(rows, labels)
}
