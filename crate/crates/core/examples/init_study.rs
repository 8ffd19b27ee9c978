//! NMF reconstruction error and accuracy over random initializations.

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::harness::{nmf_init_study, ExperimentConfig};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset() -> LabeledDataset {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let (classes, per, m, atoms) = (3, 30, 24, 18);
    let basis: Vec<Vec<f64>> = (0..atoms).map(|_| (0..m).map(|_| r.random::<f64>().powi(3)).collect()).collect();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..classes {
        for _ in 0..per {
            let mut row = vec![0.0; m];
            for (a, atom) in basis.iter().enumerate() {
                let w = if a % classes == c { 2.5 } else { 1.0 } * r.random::<f64>();
                row.iter_mut().zip(atom).for_each(|(x, b)| *x += w * b);
            }
            data.extend(row);
            labels.push(c);
        }
    }
    LabeledDataset::new(Matrix::from_row_major(classes * per, m, data).unwrap(), labels).unwrap()
}

fn main() -> fewshot_subspace::Result<()> {
    let mut cfg = ExperimentConfig::new(10, 20, vec![]);
    cfg.factorization.iters = 300;
    let study = nmf_init_study(&dataset(), &cfg, &[4, 8, 16], 5)?;
    print!("{}", study.to_table());
    for s in study.stability() {
        println!("dim {:>2}: error {:.4} ± {:.4}", s.dim, s.mean_final_error, s.std_final_error);
    }
    Ok(())
}
