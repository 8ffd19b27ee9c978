//! Supervised NMF: reconstruction plus a logistic loss on the coefficients.

use fewshot_subspace::factorization::{snmf_fit, AdadeltaParams, SnmfConfig};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fewshot_subspace::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let (n, m) = (40, 10);
    let mut data = Vec::with_capacity(n * m);
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    for &c in &labels {
        for j in 0..m {
            let boost = if (j < m / 2) == (c == 1) { 1.0 } else { 0.0 };
            data.push(boost + 0.5 * r.random::<f64>());
        }
    }
    let y = Matrix::from_row_major(n, m, data)?;

    let cfg = SnmfConfig {
        rank: 3,
        lambda_reg: 1.0,
        iters: 1500,
        seed: 1,
        adadelta: AdadeltaParams::default(),
    };
    let model = snmf_fit(&y, &labels, &cfg)?;
    let last = model.loss_trace.len() - 1;
    println!("objective {:.4} -> {:.4}", model.loss_trace[0], model.loss_trace[last]);
    println!("logistic part {:.4} -> {:.4}", model.logistic_trace[0], model.logistic_trace[last]);
    println!("β = {:?}", model.logit_coefficients);

    let pred = model.predict_logistic(&y)?;
    let hits = pred.iter().zip(&labels).filter(|(a, b)| a == b).count();
    println!("logistic head training accuracy {hits}/{n}");
    Ok(())
}
