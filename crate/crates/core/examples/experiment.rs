//! Repeated-split comparison of every representation, reported as mean±std.
//!
//! Pass a directory to also write `report.json` and `report.txt`.

use fewshot_subspace::dataset::LabeledDataset;
use fewshot_subspace::harness::{emit_report, run_experiment_on, ExperimentConfig, MethodName};
use fewshot_subspace::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset() -> LabeledDataset {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let (per, m) = (40, 16);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for _ in 0..per {
            for j in 0..m {
                let signal = if j < 2 && c == 1 { 0.8 } else { 0.0 };
                let nuisance = if (4..8).contains(&j) { 3.0 } else { 1.0 };
                data.push(signal + nuisance * r.random::<f64>());
            }
            labels.push(c);
        }
    }
    LabeledDataset::with_class_names(
        Matrix::from_row_major(2 * per, m, data).unwrap(),
        labels,
        vec!["normal".into(), "pneumonia".into()],
    )
    .unwrap()
}

fn main() -> fewshot_subspace::Result<()> {
    let mut cfg = ExperimentConfig::new(
        20,
        20,
        vec![
            MethodName::FeatureSpace,
            MethodName::Svd,
            MethodName::Lda,
            MethodName::FsBinary,
            MethodName::Nmf,
            MethodName::Snmf,
        ],
    );
    cfg.repetitions = 5;
    cfg.dims.svd = 5;
    cfg.dims.fs_binary = 5;
    cfg.dims.nmf = 5;
    cfg.dims.snmf = 5;
    cfg.factorization.iters = 300;

    let report = run_experiment_on(&dataset(), &cfg)?;
    print!("{}", report.to_table());
    if let Some(dir) = std::env::args().nth(1) {
        emit_report(&report, &dir)?;
        println!("wrote {dir}/report.json and {dir}/report.txt");
    }
    Ok(())
}
