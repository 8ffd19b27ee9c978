//! Parse a feature CSV, draw per-class splits and fingerprint them.

use fewshot_subspace::dataset::{parse_feature_csv, split_per_class, to_feature_csv, SplitSpec};

fn main() -> fewshot_subspace::Result<()> {
    let mut csv = String::from("label,f0,f1,f2\n");
    for i in 0..12 {
        let class = ["glioma", "meningioma", "pituitary"][i % 3];
        csv.push_str(&format!("{class},{},{},{}\n", i as f64 * 0.5, (i % 4) as f64, 1.0 / (1 + i) as f64));
    }
    let d = parse_feature_csv(&csv)?;
    println!("{} rows, {} features, classes {:?}", d.len(), d.dims(), d.class_names());

    for seed in [0, 1, 0] {
        let split = split_per_class(&d, &SplitSpec { train_per_class: 3, test_per_class: 1, seed })?;
        println!(
            "seed {seed}: train rows {:?} test rows {:?}\n  fingerprint {}",
            split.train_rows,
            split.test_rows,
            &split.fingerprint()[..16]
        );
    }

    let split = split_per_class(&d, &SplitSpec { train_per_class: 3, test_per_class: 1, seed: 7 })?;
    print!("test split as CSV:\n{}", to_feature_csv(&split.test));
    Ok(())
}
