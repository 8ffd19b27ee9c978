use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: [&str; 10] = [
    "dataset_split",
    "lda_multiclass",
    "foley_sammon",
    "svd_subspace",
    "nmf",
    "snmf",
    "knn_ztest",
    "experiment",
    "dimension_sweep",
    "init_study",
];

fn example_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().join("examples")
}

#[test]
fn every_example_runs() {
    let dir = example_dir();
    if !dir.join(EXAMPLES[0]).exists() {
        eprintln!("examples not built in {}, run the full test suite", dir.display());
        return;
    }
    for name in EXAMPLES {
        let out = Command::new(dir.join(name)).output().unwrap();
        assert!(
            out.status.success(),
            "{name} failed:\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
    }
}

#[test]
fn every_example_is_listed() {
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut found: Vec<String> = std::fs::read_dir(src)
        .unwrap()
        .filter_map(|e| e.unwrap().path().file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    found.sort();
    let mut listed: Vec<String> = EXAMPLES.iter().map(|s| s.to_string()).collect();
    listed.sort();
    assert_eq!(found, listed);
}
