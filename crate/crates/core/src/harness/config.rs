use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classify::KnnConfig;
use crate::dataset::{LabeledDataset, SplitSpec};
use crate::error::{Error, Result};
use crate::factorization::{AdadeltaParams, DEFAULT_EPSILON, DEFAULT_ITERS, DEFAULT_LAMBDA, DEFAULT_RHO};
use crate::subspaces::{DEFAULT_BINARY_DIMS, DEFAULT_DELTA};

/// A feature representation compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    FeatureSpace,
    Svd,
    Lda,
    FsBinary,
    Nmf,
    Snmf,
}

impl MethodName {
    pub const ALL: [MethodName; 6] = [
        MethodName::FeatureSpace,
        MethodName::Svd,
        MethodName::Lda,
        MethodName::FsBinary,
        MethodName::Nmf,
        MethodName::Snmf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodName::FeatureSpace => "feature_space",
            MethodName::Svd => "svd",
            MethodName::Lda => "lda",
            MethodName::FsBinary => "fs_binary",
            MethodName::Nmf => "nmf",
            MethodName::Snmf => "snmf",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }

    pub fn needs_nonnegative(self) -> bool {
        matches!(self, MethodName::Nmf | MethodName::Snmf)
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Subspace dimension per method. LDA always uses C − 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimsConfig {
    pub svd: usize,
    pub fs_binary: usize,
    pub nmf: usize,
    pub snmf: usize,
}

impl Default for DimsConfig {
    fn default() -> Self {
        DimsConfig {
            svd: 30,
            fs_binary: DEFAULT_BINARY_DIMS,
            nmf: 30,
            snmf: 30,
        }
    }
}

impl DimsConfig {
    pub fn get(&self, m: MethodName) -> Option<usize> {
        match m {
            MethodName::Svd => Some(self.svd),
            MethodName::FsBinary => Some(self.fs_binary),
            MethodName::Nmf => Some(self.nmf),
            MethodName::Snmf => Some(self.snmf),
            MethodName::FeatureSpace | MethodName::Lda => None,
        }
    }

    pub fn set(&mut self, m: MethodName, dim: usize) -> Result<()> {
        match m {
            MethodName::Svd => self.svd = dim,
            MethodName::FsBinary => self.fs_binary = dim,
            MethodName::Nmf => self.nmf = dim,
            MethodName::Snmf => self.snmf = dim,
            MethodName::Lda => {
                return Err(Error::invalid("lda dimension is fixed at C - 1 and cannot be set"))
            }
            MethodName::FeatureSpace => {
                return Err(Error::invalid("feature_space has no subspace dimension"))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorizationConfig {
    pub iters: usize,
    pub lambda_reg: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for FactorizationConfig {
    fn default() -> Self {
        FactorizationConfig {
            iters: DEFAULT_ITERS,
            lambda_reg: DEFAULT_LAMBDA,
            rho: DEFAULT_RHO,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl FactorizationConfig {
    pub fn adadelta(&self) -> AdadeltaParams {
        AdadeltaParams {
            rho: self.rho,
            epsilon: self.epsilon,
        }
    }
}

fn default_repetitions() -> usize {
    10
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

/// Everything that determines an experiment. Unknown JSON keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub dataset_path: String,
    pub train_per_class: usize,
    pub test_per_class: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub methods: Vec<MethodName>,
    #[serde(default)]
    pub dims: DimsConfig,
    #[serde(default)]
    pub knn: KnnConfig,
    #[serde(default)]
    pub factorization: FactorizationConfig,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub svd_center: bool,
    #[serde(default = "default_delta")]
    pub lda_delta: f64,
}

impl ExperimentConfig {
    /// Config with every optional field at its default.
    pub fn new(train_per_class: usize, test_per_class: usize, methods: Vec<MethodName>) -> Self {
        ExperimentConfig {
            dataset_path: String::new(),
            train_per_class,
            test_per_class,
            repetitions: default_repetitions(),
            methods,
            dims: DimsConfig::default(),
            knn: KnnConfig::default(),
            factorization: FactorizationConfig::default(),
            base_seed: 0,
            svd_center: false,
            lda_delta: DEFAULT_DELTA,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `key=value` overrides. Keys are dotted paths into the JSON form
    /// (`knn.k_values`, `factorization.iters`) and must already exist; values are parsed
    /// as JSON, falling back to a plain string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut doc = serde_json::to_value(self).expect("config serializes");
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
            let mut slot = &mut doc;
            for part in key.split('.') {
                slot = slot
                    .as_object_mut()
                    .and_then(|o| o.get_mut(part))
                    .ok_or_else(|| Error::Config(format!("unknown config key {key:?}")))?;
            }
            *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        }
        serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn split_spec(&self, repetition: usize) -> SplitSpec {
        SplitSpec {
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            seed: self.base_seed.wrapping_add(repetition as u64),
        }
    }

    /// Seed for factorization initialization in a repetition, independent of the split seed.
    pub fn factorization_seed(&self, repetition: usize) -> u64 {
        self.base_seed
            .wrapping_mul(1000)
            .wrapping_add(repetition as u64)
    }

    /// Dimension a method will use on a problem with `classes` classes.
    pub fn dims_for(&self, method: MethodName, classes: usize, features: usize) -> usize {
        match method {
            MethodName::FeatureSpace => features,
            MethodName::Lda => classes.saturating_sub(1),
            m => self.dims.get(m).expect("subspace method"),
        }
    }

    /// Checks everything that can be checked without fitting.
    pub fn validate_for(&self, d: &LabeledDataset) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.repetitions == 0 {
            return fail("repetitions must be >= 1".into());
        }
        if self.train_per_class == 0 || self.test_per_class == 0 {
            return fail("train_per_class and test_per_class must be >= 1".into());
        }
        if self.methods.is_empty() {
            return fail("no methods requested".into());
        }
        let unique: BTreeSet<_> = self.methods.iter().collect();
        if unique.len() != self.methods.len() {
            return fail("methods list contains duplicates".into());
        }
        self.knn.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.factorization
            .adadelta()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.factorization.iters == 0 {
            return fail("factorization.iters must be >= 1".into());
        }
        if self.factorization.lambda_reg.is_nan() || self.factorization.lambda_reg < 0.0 {
            return fail("factorization.lambda_reg must be >= 0".into());
        }
        if self.lda_delta.is_nan() || self.lda_delta <= 0.0 {
            return fail("lda_delta must be > 0".into());
        }

        let c = d.class_count();
        let m = d.dims();
        let n_train = self.train_per_class * c;
        let need = self.train_per_class + self.test_per_class;
        for (class, size) in d.class_sizes().into_iter().enumerate() {
            if size < need {
                return Err(Error::InsufficientClassSize {
                    class,
                    have: size,
                    need,
                });
            }
        }
        if self.knn.max_k() > n_train {
            return fail(format!(
                "largest k = {} exceeds the {n_train} training samples",
                self.knn.max_k()
            ));
        }
        for &method in &self.methods {
            self.check_method(method, c, m, n_train)?;
        }
        if self.methods.iter().any(|m| m.needs_nonnegative()) {
            if let Some((i, j, v)) = first_negative(d) {
                return fail(format!(
                    "nmf/snmf need non-negative features; entry ({i}, {j}) is {v}"
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn check_method(
        &self,
        method: MethodName,
        classes: usize,
        features: usize,
        n_train: usize,
    ) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        match method {
            MethodName::FeatureSpace => {}
            MethodName::Lda => {
                if classes < 2 {
                    return fail("lda needs at least two classes".into());
                }
                if classes - 1 > features {
                    return fail(format!("lda needs {} dims but features have {features}", classes - 1));
                }
            }
            MethodName::FsBinary | MethodName::Snmf if classes != 2 => {
                return fail(format!(
                    "{method} requires exactly 2 classes, dataset has {classes}"
                ));
            }
            _ => {}
        }
        let dim = self.dims.get(method);
        match (method, dim) {
            (MethodName::Svd, Some(p)) if p == 0 || p > n_train.min(features) => fail(format!(
                "svd dim {p} must be in 1..={}",
                n_train.min(features)
            )),
            (MethodName::FsBinary, Some(p)) if p == 0 || p > features => {
                fail(format!("fs_binary dim {p} must be in 1..={features}"))
            }
            (MethodName::Nmf | MethodName::Snmf, Some(p))
                if p == 0 || p >= n_train.min(features) =>
            {
                fail(format!(
                    "{method} dim {p} must be in 1..{}",
                    n_train.min(features)
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Entries in `[-1e-9, 0)` are tolerated (they are clamped before factorizing).
fn first_negative(d: &LabeledDataset) -> Option<(usize, usize, f64)> {
    let f = d.features();
    for i in 0..f.rows() {
        for j in 0..f.cols() {
            if f[(i, j)] < -crate::dataset::NONNEG_CLAMP_TOLERANCE {
                return Some((i, j, f[(i, j)]));
            }
        }
    }
    None
}
