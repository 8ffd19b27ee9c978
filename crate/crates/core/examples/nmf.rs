//! Non-negative factorization: fit, convergence trace, and coefficients for new rows.

use fewshot_subspace::factorization::{nmf_fit, nmf_transform, reconstruction_error};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fewshot_subspace::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (n, m, p) = (30, 12, 3);
    let k = Matrix::from_row_major(n, p, (0..n * p).map(|_| r.random::<f64>()).collect())?;
    let x = Matrix::from_row_major(p, m, (0..p * m).map(|_| r.random::<f64>()).collect())?;
    let y = k.matmul(&x)?;

    let model = nmf_fit(&y, p, 3000, 42)?;
    for it in [0, 9, 99, 999, 2999] {
        println!("round {:>4}: ‖Y − KX‖ = {:.3e}", it + 1, model.error_trace[it]);
    }

    let rows = y.select_rows(&[0, 1]);
    let coeffs = nmf_transform(&model.x, &rows, 3000, 7)?;
    println!("refit coefficients {:?}", coeffs);
    println!("fitted K rows      {:?}", model.k.select_rows(&[0, 1]));
    println!("refit error {:.3e}", reconstruction_error(&coeffs, &model.x, &rows)?);
    Ok(())
}
