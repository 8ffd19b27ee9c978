//! KNN with deterministic tie-breaking, accuracy averaged over k, and the Z-test.

use fewshot_subspace::classify::{accuracy, knn_predict, mean_accuracy_over_k, z_test, KnnConfig};
use fewshot_subspace::Matrix;

fn main() -> fewshot_subspace::Result<()> {
    let train = Matrix::from_rows(&[[0.0], [1.0], [-2.0], [5.0], [6.0], [7.0]])?;
    let labels = [0, 0, 1, 1, 1, 1];
    let test = Matrix::from_rows(&[[0.0], [5.5], [-1.0]])?;
    let truth = [0, 1, 1];

    for k in [1, 2, 3] {
        let pred = knn_predict(&train, &labels, &test, k)?;
        println!("k={k}: {pred:?} accuracy {:.3}", accuracy(&pred, &truth)?);
    }
    let cfg = KnnConfig { k_values: vec![1, 2, 3], ..KnnConfig::default() };
    println!("mean over k: {:.3}", mean_accuracy_over_k(&train, &labels, &test, &truth, &cfg)?);

    let discriminant = [0.60, 0.62, 0.58, 0.60];
    let svd = [0.50, 0.52, 0.48, 0.50];
    let t = z_test(&discriminant, &svd)?;
    println!("z = {:.4}, p = {:.3e}", t.z, t.p);
    Ok(())
}
