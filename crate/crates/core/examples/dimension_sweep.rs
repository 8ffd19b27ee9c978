//! Accuracy of the binary discriminant subspace as its dimension grows.

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::harness::{dimension_sweep, ExperimentConfig, MethodName};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let (u1, u2) = (1.0 - r.random::<f64>(), r.random::<f64>());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Class 1 is shifted and twice as spread out on ten axes of decreasing scale.
fn dataset() -> LabeledDataset {
    let mut r = ChaCha8Rng::seed_from_u64(0);
    let (per, m) = (40, 32);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..per {
            for j in 0..m {
                let v = if j < 10 {
                    let s = 0.85f64.powi(j as i32);
                    if c == 0 { s * gaussian(&mut r) } else { s * (0.5 + 2.0 * gaussian(&mut r)) }
                } else {
                    0.3 * gaussian(&mut r)
                };
                data.push(v);
            }
            labels.push(c);
        }
    }
    LabeledDataset::new(Matrix::from_row_major(2 * per, m, data).unwrap(), labels).unwrap()
}

fn main() -> fewshot_subspace::Result<()> {
    let cfg = ExperimentConfig::new(20, 20, vec![]);
    let table = dimension_sweep(&dataset(), &cfg, MethodName::FsBinary, &(1..=10).collect::<Vec<_>>())?;
    print!("{}", table.to_table());
    print!("{}", table.to_csv());
    Ok(())
}
