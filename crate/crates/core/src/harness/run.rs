use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MethodName};
use super::report::{
    DatasetSummary, ExperimentReport, InitStudy, InitStudyRow, MethodResult, PairwiseTest,
    SweepRow, SweepTable,
};
use crate::classify::{mean_accuracy_over_k, z_test};
use crate::dataset::{
    load_feature_csv, split_per_class, validate_nonnegative, LabeledDataset, Split, SplitSpec,
};
use crate::error::{Error, Result};
use crate::factorization::{nmf_fit, nmf_transform, snmf_fit, SnmfConfig};
use crate::matrix::Matrix;
use crate::subspaces::{
    compute_scatter, fit_fs_binary, fit_lda_multiclass, fit_svd_subspace, LdaConfig,
};

/// Loads `cfg.dataset_path` and runs the experiment on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.dataset_path.is_empty() {
        return Err(Error::Config("dataset_path is empty".into()));
    }
    let d = load_feature_csv(&cfg.dataset_path)?;
    run_experiment_on(&d, cfg)
}

struct Repetition {
    hash: String,
    results: Vec<(f64, f64)>,
}

/// Runs every method of `cfg` over `cfg.repetitions` independent splits of `d`.
pub fn run_experiment_on(d: &LabeledDataset, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate_for(d)?;
    let reps: Vec<Repetition> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|r| run_repetition(d, cfg, r))
        .collect::<Result<_>>()?;

    let classes = d.class_count();
    let methods: Vec<MethodResult> = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let accuracies: Vec<f64> = reps.iter().map(|r| r.results[i].0).collect();
            let (mean, std) = mean_std(&accuracies);
            MethodResult {
                method,
                dims: cfg.dims_for(method, classes, d.dims()),
                mean,
                std,
                accuracies,
                wall_time_secs: reps.iter().map(|r| r.results[i].1).sum(),
            }
        })
        .collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        dataset: DatasetSummary::of(d),
        split_hashes: reps.into_iter().map(|r| r.hash).collect(),
        pairwise: pairwise_tests(&methods)?,
        methods,
    })
}

fn run_repetition(d: &LabeledDataset, cfg: &ExperimentConfig, r: usize) -> Result<Repetition> {
    let split = split_per_class(d, &cfg.split_spec(r)).map_err(|e| annotate(e, r, "split"))?;
    let seed = cfg.factorization_seed(r);
    let results = cfg
        .methods
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let acc = evaluate_method(m, &split, cfg, seed).map_err(|e| annotate(e, r, m.as_str()))?;
            Ok((acc, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    Ok(Repetition {
        hash: split.fingerprint(),
        results,
    })
}

fn annotate(e: Error, repetition: usize, method: &str) -> Error {
    Error::Experiment {
        repetition,
        method: method.to_string(),
        source: Box::new(e),
    }
}

fn nonnegative(d: &LabeledDataset) -> Result<LabeledDataset> {
    Ok(validate_nonnegative(d.clone(), true)?.0)
}

/// Fits `method` on the training half of `split` and returns the mean KNN accuracy on the test half.
pub fn evaluate_method(
    method: MethodName,
    split: &Split,
    cfg: &ExperimentConfig,
    factorization_seed: u64,
) -> Result<f64> {
    let (train, test) = (&split.train, &split.test);
    let score = |tr: &Matrix, te: &Matrix| {
        mean_accuracy_over_k(tr, train.labels(), te, test.labels(), &cfg.knn)
    };
    let lda = LdaConfig {
        delta: cfg.lda_delta,
        max_dims_binary: cfg.dims.fs_binary,
    };
    let f = &cfg.factorization;
    match method {
        MethodName::FeatureSpace => score(train.features(), test.features()),
        MethodName::Svd => {
            let p = fit_svd_subspace(train, cfg.dims.svd, cfg.svd_center)?;
            score(&p.project(train.features())?, &p.project(test.features())?)
        }
        MethodName::Lda => {
            let p = fit_lda_multiclass(&compute_scatter(train)?, &lda)?;
            score(&p.project(train.features())?, &p.project(test.features())?)
        }
        MethodName::FsBinary => {
            let p = fit_fs_binary(&compute_scatter(train)?, cfg.dims.fs_binary, &lda)?;
            score(&p.project(train.features())?, &p.project(test.features())?)
        }
        MethodName::Nmf => {
            let (tr, te) = (nonnegative(train)?, nonnegative(test)?);
            let m = nmf_fit(tr.features(), cfg.dims.nmf, f.iters, factorization_seed)?;
            let k_test = nmf_transform(&m.x, te.features(), f.iters, factorization_seed)?;
            score(&m.k, &k_test)
        }
        MethodName::Snmf => {
            let (tr, te) = (nonnegative(train)?, nonnegative(test)?);
            let m = snmf_fit(
                tr.features(),
                tr.labels(),
                &SnmfConfig {
                    rank: cfg.dims.snmf,
                    lambda_reg: f.lambda_reg,
                    iters: f.iters,
                    seed: factorization_seed,
                    adadelta: f.adadelta(),
                },
            )?;
            let k_test = nmf_transform(&m.x, te.features(), f.iters, factorization_seed)?;
            score(&m.k, &k_test)
        }
    }
}

/// Arithmetic mean and unbiased standard deviation; the deviation of a single value is 0.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn pairwise_tests(methods: &[MethodResult]) -> Result<Vec<PairwiseTest>> {
    let mut out = Vec::new();
    if methods.first().is_none_or(|m| m.accuracies.len() < 2) {
        return Ok(out);
    }
    for (i, a) in methods.iter().enumerate() {
        for b in &methods[i + 1..] {
            let t = z_test(&a.accuracies, &b.accuracies)?;
            out.push(PairwiseTest {
                a: a.method,
                b: b.method,
                z: t.z,
                p: t.p,
            });
        }
    }
    Ok(out)
}

/// One experiment per dimension with shared seeds, so every row sees the same splits.
pub fn dimension_sweep(
    d: &LabeledDataset,
    cfg: &ExperimentConfig,
    method: MethodName,
    dims: &[usize],
) -> Result<SweepTable> {
    if dims.is_empty() {
        return Err(Error::invalid("dimension sweep needs at least one dim"));
    }
    if matches!(method, MethodName::Lda | MethodName::FeatureSpace) {
        return Err(Error::invalid(format!(
            "{method} has no adjustable dimension and cannot be swept"
        )));
    }
    let mut sorted: Vec<usize> = dims.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let n_train = cfg.train_per_class * d.class_count();
    let mut base = cfg.clone();
    base.methods = vec![method];
    let configs: Vec<ExperimentConfig> = sorted
        .iter()
        .map(|&dim| {
            let mut c = base.clone();
            c.dims.set(method, dim)?;
            c.check_method(method, d.class_count(), d.dims(), n_train)
                .map_err(|e| Error::invalid(format!("dim {dim} is invalid for {method}: {e}")))?;
            Ok(c)
        })
        .collect::<Result<_>>()?;

    let rows = configs
        .par_iter()
        .zip(sorted.par_iter())
        .map(|(c, &dim)| {
            let report = run_experiment_on(d, c)?;
            let m = &report.methods[0];
            Ok(SweepRow {
                dim,
                mean: m.mean,
                std: m.std,
                accuracies: m.accuracies.clone(),
                split_hashes: report.split_hashes,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SweepTable { method, rows })
}

/// NMF fitted `inits` times per dimension on the split of repetition 0. Init seed `i` is
/// `base_seed * 1000 + i`.
pub fn nmf_init_study(
    d: &LabeledDataset,
    cfg: &ExperimentConfig,
    dims: &[usize],
    inits: usize,
) -> Result<InitStudy> {
    if dims.is_empty() || inits == 0 {
        return Err(Error::invalid("init study needs at least one dim and one init"));
    }
    let d = validate_nonnegative(d.clone(), true)?.0;
    let spec: SplitSpec = cfg.split_spec(0);
    let split = split_per_class(&d, &spec)?;
    let n_train = split.train.len();
    for &dim in dims {
        if dim == 0 || dim >= n_train.min(d.dims()) {
            return Err(Error::invalid(format!(
                "dim {dim} is invalid for nmf: must be in 1..{}",
                n_train.min(d.dims())
            )));
        }
    }
    cfg.knn.validate()?;
    let jobs: Vec<(usize, u64)> = dims
        .iter()
        .flat_map(|&dim| (0..inits).map(move |i| (dim, cfg.factorization_seed(i))))
        .collect();
    let iters = cfg.factorization.iters;
    let rows = jobs
        .par_iter()
        .map(|&(dim, seed)| {
            let m = nmf_fit(split.train.features(), dim, iters, seed)?;
            let k_test = nmf_transform(&m.x, split.test.features(), iters, seed)?;
            let acc = mean_accuracy_over_k(
                &m.k,
                split.train.labels(),
                &k_test,
                split.test.labels(),
                &cfg.knn,
            )?;
            Ok(InitStudyRow {
                dim,
                init_seed: seed,
                final_error: m.final_error(),
                mean_accuracy: acc,
            })
        })
        .collect::<Result<_>>()?;
    Ok(InitStudy {
        split_hash: split.fingerprint(),
        rows,
    })
}

pub(crate) fn group_by_dim<T: Copy>(
    rows: &[InitStudyRow],
    f: impl Fn(&InitStudyRow) -> T,
) -> BTreeMap<usize, Vec<T>> {
    let mut out: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for r in rows {
        out.entry(r.dim).or_default().push(f(r));
    }
    out
}
