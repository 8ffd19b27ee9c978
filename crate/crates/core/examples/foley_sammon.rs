//! Orthogonal binary discriminant directions and their Fisher ratios.

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::subspaces::{compute_scatter, fit_fs_binary, LdaConfig};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fewshot_subspace::Result<()> {
    // Two points per class: means (2, 0) and (0, 3), pooled scatter I.
    let four = LabeledDataset::new(
        Matrix::from_rows(&[[1.0, 0.0], [3.0, 0.0], [0.0, 2.0], [0.0, 4.0]])?,
        vec![0, 0, 1, 1],
    )?;
    let p = fit_fs_binary(&compute_scatter(&four)?, 1, &LdaConfig::default())?;
    println!("d1 = {:?}, γ1 = {:.6}", p.directions.column(0), p.discrim_values[0]);

    let mut r = ChaCha8Rng::seed_from_u64(3);
    let m = 6;
    let scales: Vec<f64> = (0..m).map(|j| 1.0 + j as f64).collect();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..20 {
            for s in &scales {
                data.push(c as f64 + s * (r.random::<f64>() - 0.5));
            }
            labels.push(c);
        }
    }
    let d = LabeledDataset::new(Matrix::from_row_major(40, m, data)?, labels)?;
    let p = fit_fs_binary(&compute_scatter(&d)?, m, &LdaConfig::default())?;
    println!("γ sequence: {:?}", p.discrim_values);
    let gram = p.directions.transpose().matmul(&p.directions)?;
    let off = (0..m)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| (gram[(i, j)] - f64::from(u8::from(i == j))).abs())
        .fold(0.0, f64::max);
    println!("max |DᵀD − I| = {off:.2e}, ridge used = {}", p.regularization);
    Ok(())
}
