//! Multiclass discriminant subspace: C − 1 directions from the scatter matrices.

use fewshot_subspace::classify::{mean_accuracy_over_k, KnnConfig};
use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::subspaces::{compute_scatter, discrim_values, fit_lda_multiclass, LdaConfig};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let (u1, u2) = (1.0 - r.random::<f64>(), r.random::<f64>());
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Three classes separated along axis 0 and 1, with large nuisance variance on axis 2.
fn sample(n: usize, r: &mut ChaCha8Rng) -> LabeledDataset {
    let centers = [[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]];
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (c, m) in centers.iter().enumerate() {
        for _ in 0..n {
            data.extend([m[0] + 0.5 * gaussian(r), m[1] + 0.5 * gaussian(r), 6.0 * gaussian(r), gaussian(r)]);
            labels.push(c);
        }
    }
    LabeledDataset::new(Matrix::from_row_major(3 * n, 4, data).unwrap(), labels).unwrap()
}

fn main() -> fewshot_subspace::Result<()> {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let (train, test) = (sample(30, &mut r), sample(20, &mut r));

    let stats = compute_scatter(&train)?;
    let lda = fit_lda_multiclass(&stats, &LdaConfig::default())?;
    println!("{} directions for {} classes", lda.dims, stats.class_count());
    println!("discrim values {:?}", lda.discrim_values);
    println!("recomputed     {:?}", discrim_values(&lda, &stats)?);
    println!("directions (columns):\n{:?}", lda.directions);

    let knn = KnnConfig::default();
    let raw = mean_accuracy_over_k(train.features(), train.labels(), test.features(), test.labels(), &knn)?;
    let projected = mean_accuracy_over_k(
        &lda.project(train.features())?,
        train.labels(),
        &lda.project(test.features())?,
        test.labels(),
        &knn,
    )?;
    println!("KNN accuracy: raw {:.3}, discriminant subspace {:.3}", raw, projected);
    Ok(())
}
