//! Truncated SVD subspace, uncentered and centered.

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::matrix::svd_decompose;
use fewshot_subspace::subspaces::fit_svd_subspace;
use fewshot_subspace::Matrix;

fn main() -> fewshot_subspace::Result<()> {
    let y = Matrix::from_rows(&[
        [4.0, 2.0, 0.1, 0.0],
        [3.9, 2.1, 0.0, 0.2],
        [0.2, 0.1, 3.0, 1.0],
        [0.1, 0.0, 3.1, 0.9],
        [2.0, 1.0, 1.5, 0.5],
    ])?;
    let d = LabeledDataset::new(y.clone(), vec![0, 0, 1, 1, 0])?;

    let full = svd_decompose(&y)?;
    println!("singular values {:?}", full.singular_values);

    for center in [false, true] {
        let p = fit_svd_subspace(&d, 2, center)?;
        let z = p.project(&y)?;
        println!("center={center}: kept singular values {:?}", p.singular_values);
        println!("  projected energy {:.4} of {:.4}", z.frobenius_norm(), y.frobenius_norm());
    }
    Ok(())
}
