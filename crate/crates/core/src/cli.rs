//! Command-line front end: `split`, `fit`, `transform`, `evaluate`, `sweep`, `init-study`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 numerical failure.
//! Failures print one line `error[<kind>]: <message>` to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{
    load_feature_csv, split_per_class, validate_nonnegative, write_feature_csv, LabeledDataset,
};
use crate::error::{Error, Result};
use crate::factorization::{nmf_fit, nmf_transform, snmf_fit, NmfModel, SnmfConfig, SnmfModel};
use crate::harness::{
    dimension_sweep, emit_init_study, emit_report, emit_sweep, nmf_init_study, run_experiment_on,
    ExperimentConfig, MethodName,
};
use crate::matrix::Matrix;
use crate::subspaces::{
    compute_scatter, fit_fs_binary, fit_lda_multiclass, fit_svd_subspace, LdaConfig, Projection,
};

#[derive(Parser, Debug)]
#[command(name = "fewshot-subspace", version, about = "Subspace features and few-shot evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Experiment config JSON
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override a config key, e.g. `--set knn.k_values=[1,5]` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Base seed, replaces `base_seed`
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Feature CSV, replaces `dataset_path`
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw one per-class split and write train.csv, test.csv and split.json
    Split(ConfigArgs),
    /// Fit one method on a feature CSV and write model.json and train_projected.csv
    Fit {
        /// Feature CSV to fit on (defaults to the config's dataset_path)
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// svd, lda, fs_binary, nmf or snmf
        #[arg(long)]
        method: String,
        /// Subspace dimension (ignored by lda)
        #[arg(long, value_name = "N")]
        dims: Option<usize>,
        /// Optional config supplying delta, centering and factorization settings
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Factorization initialization seed
        #[arg(long, value_name = "U64")]
        seed: Option<u64>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Project a feature CSV with a fitted model and write projected.csv
    Transform {
        /// model.json written by `fit`
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the repeated-split experiment and write report.json and report.txt
    Evaluate {
        #[command(flatten)]
        args: ConfigArgs,
        /// Comma-separated methods, replaces `methods`
        #[arg(long)]
        method: Option<String>,
    },
    /// Accuracy against subspace dimension; writes sweep.json, sweep.csv and sweep.txt
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long)]
        method: String,
        /// Comma-separated dimensions, `a-b` ranges allowed
        #[arg(long, value_name = "LIST")]
        dims: String,
    },
    /// NMF over many initializations per dimension on one split
    InitStudy {
        #[command(flatten)]
        args: ConfigArgs,
        /// Comma-separated dimensions, `a-b` ranges allowed
        #[arg(long, value_name = "LIST")]
        dims: String,
        /// Initializations per dimension
        #[arg(long, default_value_t = 20)]
        inits: usize,
    },
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`dispatch`] with explicit output streams.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "error[{}]: {msg}", e.kind());
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// `"1,3,5-7"` → `[1, 3, 5, 6, 7]`.
pub fn parse_dims(list: &str) -> Result<Vec<usize>> {
    let bad = |s: &str| Error::invalid(format!("bad dimension list entry {s:?}"));
    let mut dims = Vec::new();
    for part in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad(part))?;
                let b: usize = b.trim().parse().map_err(|_| bad(part))?;
                if a > b {
                    return Err(bad(part));
                }
                dims.extend(a..=b);
            }
            None => dims.push(part.parse().map_err(|_| bad(part))?),
        }
    }
    if dims.is_empty() {
        return Err(Error::invalid("empty dimension list"));
    }
    Ok(dims)
}

fn load_config(path: Option<&Path>, set: &[String], seed: Option<u64>) -> Result<ExperimentConfig> {
    let base = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(1, 1, Vec::new()),
    };
    let mut cfg = base.with_overrides(set)?;
    if let Some(s) = seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn resolve(args: &ConfigArgs) -> Result<(ExperimentConfig, LabeledDataset)> {
    let mut cfg = load_config(Some(&args.config), &args.set, args.seed)?;
    if let Some(p) = &args.input {
        cfg.dataset_path = p.display().to_string();
    }
    let d = load_dataset(&cfg)?;
    Ok((cfg, d))
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<LabeledDataset> {
    if cfg.dataset_path.is_empty() {
        return Err(Error::Config("no dataset: set dataset_path or pass --input".into()));
    }
    load_feature_csv(&cfg.dataset_path)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct SplitFile {
    seed: u64,
    train_per_class: usize,
    test_per_class: usize,
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
    fingerprint: String,
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Split(args) => {
            let (cfg, d) = resolve(&args)?;
            let spec = cfg.split_spec(0);
            let split = split_per_class(&d, &spec)?;
            create_dir(&args.out)?;
            write_feature_csv(&split.train, args.out.join("train.csv"))?;
            write_feature_csv(&split.test, args.out.join("test.csv"))?;
            let file = SplitFile {
                seed: spec.seed,
                train_per_class: spec.train_per_class,
                test_per_class: spec.test_per_class,
                fingerprint: split.fingerprint(),
                train_rows: split.train_rows,
                test_rows: split.test_rows,
            };
            write_text(
                &args.out.join("split.json"),
                &serde_json::to_string_pretty(&file).expect("split serializes"),
            )?;
            let _ = writeln!(out, "split {}", file.fingerprint);
        }
        Command::Fit {
            input,
            method,
            dims,
            config,
            set,
            seed,
            out: dir,
        } => {
            let mut cfg = load_config(config.as_deref(), &set, None)?;
            if let Some(p) = input {
                cfg.dataset_path = p.display().to_string();
            }
            let d = load_dataset(&cfg)?;
            let method = MethodName::parse(&method)?;
            if let Some(p) = dims {
                cfg.dims.set(method, p)?;
            }
            let seed = seed.unwrap_or_else(|| cfg.factorization_seed(0));
            let (model_json, projected) = fit_model(&d, &cfg, method, seed)?;
            create_dir(&dir)?;
            write_text(&dir.join("model.json"), &model_json)?;
            write_feature_csv(&d.with_features(projected)?, dir.join("train_projected.csv"))?;
            let _ = writeln!(out, "fit {method} -> {}", dir.join("model.json").display());
        }
        Command::Transform { model, input, out: dir } => {
            let text = std::fs::read_to_string(&model).map_err(|e| Error::io(&model, e))?;
            let d = load_feature_csv(&input)?;
            let projected = transform_with(&text, &d)?;
            create_dir(&dir)?;
            write_feature_csv(&d.with_features(projected)?, dir.join("projected.csv"))?;
            let _ = writeln!(out, "transform -> {}", dir.join("projected.csv").display());
        }
        Command::Evaluate { args, method } => {
            let (mut cfg, d) = resolve(&args)?;
            if let Some(list) = method {
                cfg.methods = list
                    .split(',')
                    .map(|s| MethodName::parse(s.trim()))
                    .collect::<Result<_>>()?;
            }
            let report = run_experiment_on(&d, &cfg)?;
            emit_report(&report, &args.out)?;
            let _ = write!(out, "{}", report.to_table());
        }
        Command::Sweep { args, method, dims } => {
            let (cfg, d) = resolve(&args)?;
            let table = dimension_sweep(&d, &cfg, MethodName::parse(&method)?, &parse_dims(&dims)?)?;
            emit_sweep(&table, &args.out)?;
            let _ = write!(out, "{}", table.to_table());
        }
        Command::InitStudy { args, dims, inits } => {
            let (cfg, d) = resolve(&args)?;
            let study = nmf_init_study(&d, &cfg, &parse_dims(&dims)?, inits)?;
            emit_init_study(&study, &args.out)?;
            let _ = write!(out, "{}", study.to_table());
        }
    }
    Ok(())
}

/// Fits `method` on all of `d`; returns the model JSON and the projected training rows.
fn fit_model(
    d: &LabeledDataset,
    cfg: &ExperimentConfig,
    method: MethodName,
    seed: u64,
) -> Result<(String, Matrix)> {
    let lda = LdaConfig {
        delta: cfg.lda_delta,
        max_dims_binary: cfg.dims.fs_binary,
    };
    let f = &cfg.factorization;
    let projection = match method {
        MethodName::FeatureSpace => {
            return Err(Error::invalid("feature_space has nothing to fit"))
        }
        MethodName::Svd => fit_svd_subspace(d, cfg.dims.svd, cfg.svd_center)?,
        MethodName::Lda => fit_lda_multiclass(&compute_scatter(d)?, &lda)?,
        MethodName::FsBinary => fit_fs_binary(&compute_scatter(d)?, cfg.dims.fs_binary, &lda)?,
        MethodName::Nmf => {
            let d = validate_nonnegative(d.clone(), true)?.0;
            let m = nmf_fit(d.features(), cfg.dims.nmf, f.iters, seed)?;
            return Ok((m.to_json(), m.k));
        }
        MethodName::Snmf => {
            let d = validate_nonnegative(d.clone(), true)?.0;
            let m = snmf_fit(
                d.features(),
                d.labels(),
                &SnmfConfig {
                    rank: cfg.dims.snmf,
                    lambda_reg: f.lambda_reg,
                    iters: f.iters,
                    seed,
                    adadelta: f.adadelta(),
                },
            )?;
            return Ok((m.to_json(), m.k));
        }
    };
    let projected = projection.project(d.features())?;
    Ok((projection.to_json(), projected))
}

/// Projects with whichever model kind `json` holds. Factorization models reuse their
/// training iteration count and seed.
pub fn transform_with(json: &str, d: &LabeledDataset) -> Result<Matrix> {
    let kind = serde_json::from_str::<serde_json::Value>(json)
        .map_err(|e| Error::invalid(format!("model JSON: {e}")))?
        .get("kind")
        .and_then(|k| k.as_str().map(str::to_owned));
    match kind.as_deref() {
        Some("nmf") => {
            let m = NmfModel::from_json(json)?;
            let y = validate_nonnegative(d.clone(), true)?.0;
            nmf_transform(&m.x, y.features(), m.iters, m.seed)
        }
        Some("snmf") => {
            let m = SnmfModel::from_json(json)?;
            let y = validate_nonnegative(d.clone(), true)?.0;
            nmf_transform(&m.x, y.features(), m.iters, m.seed)
        }
        _ => Projection::from_json(json)?.project(d.features()),
    }
}
