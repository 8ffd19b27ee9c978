use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MethodName};
use super::run::{group_by_dim, mean_std};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSummary {
    pub samples: usize,
    pub features: usize,
    pub class_names: Vec<String>,
    pub class_sizes: Vec<usize>,
}

impl DatasetSummary {
    pub fn of(d: &LabeledDataset) -> Self {
        DatasetSummary {
            samples: d.len(),
            features: d.dims(),
            class_names: d.class_names().to_vec(),
            class_sizes: d.class_sizes(),
        }
    }
}

/// Accuracies are fractions in [0, 1]; tables show them as percentages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodResult {
    pub method: MethodName,
    pub dims: usize,
    pub mean: f64,
    pub std: f64,
    pub accuracies: Vec<f64>,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseTest {
    pub a: MethodName,
    pub b: MethodName,
    #[serde(with = "extended_float")]
    pub z: f64,
    pub p: f64,
}

/// JSON has no infinities; `±inf` are written as the strings "inf" and "-inf".
mod extended_float {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else if *v < 0.0 {
            s.serialize_str("-inf")
        } else {
            s.serialize_str("nan")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    pub methods: Vec<MethodResult>,
    /// Split fingerprint per repetition, shared by every method.
    pub split_hashes: Vec<String>,
    pub pairwise: Vec<PairwiseTest>,
}

/// `58.684, 3.749` → `"58.68±3.75"`. Arguments are already in percent.
pub fn format_cell(mean: f64, std: f64) -> String {
    format!("{mean:.2}±{std:.2}")
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_exact(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

impl ExperimentReport {
    pub fn method(&self, m: MethodName) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == m)
    }

    pub fn pair(&self, a: MethodName, b: MethodName) -> Option<&PairwiseTest> {
        self.pairwise
            .iter()
            .find(|t| (t.a, t.b) == (a, b) || (t.a, t.b) == (b, a))
    }

    /// Copy with every wall-time field zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for m in &mut r.methods {
            m.wall_time_secs = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("report JSON: {e}")))
    }

    /// Fixed-width table of mean±std accuracy per method followed by the pairwise tests.
    pub fn to_table(&self) -> String {
        let cells: Vec<String> = self
            .methods
            .iter()
            .map(|m| format_cell(100.0 * m.mean, 100.0 * m.std))
            .collect();
        let name_w = self
            .methods
            .iter()
            .map(|m| m.method.as_str().len())
            .chain(["method".len()])
            .max()
            .unwrap_or(6);
        let cell_w = cells.iter().map(|c| c.chars().count()).chain([12]).max().unwrap_or(12);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<name_w$}  {:>5}  {:>cell_w$}",
            "method", "dims", "accuracy (%)"
        );
        for (m, cell) in self.methods.iter().zip(&cells) {
            let pad = cell_w - cell.chars().count();
            let _ = writeln!(
                out,
                "{:<name_w$}  {:>5}  {}{cell}",
                m.method.as_str(),
                m.dims,
                " ".repeat(pad)
            );
        }
        let _ = writeln!(
            out,
            "\nrepetitions: {}  train/test per class: {}/{}",
            self.split_hashes.len(),
            self.config.train_per_class,
            self.config.test_per_class
        );
        if !self.pairwise.is_empty() {
            let pair_w = self
                .pairwise
                .iter()
                .map(|t| t.a.as_str().len() + t.b.as_str().len() + 4)
                .max()
                .unwrap_or(4);
            let _ = writeln!(out, "\n{:<pair_w$}  {:>9}  {:>10}", "pair", "z", "p");
            for t in &self.pairwise {
                let pair = format!("{} vs {}", t.a, t.b);
                let _ = writeln!(out, "{pair:<pair_w$}  {:>9.3}  {:>10.3e}", t.z, t.p);
            }
        }
        out
    }
}

/// Writes `report.json` and `report.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_file(&dir.join("report.json"), &report.to_json())?;
    write_file(&dir.join("report.txt"), &report.to_table())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub dim: usize,
    pub mean: f64,
    pub std: f64,
    pub accuracies: Vec<f64>,
    pub split_hashes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub method: MethodName,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,mean,std\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.dim, format_exact(r.mean), format_exact(r.std));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{}\n{:>5}  {:>12}\n", self.method, "dim", "accuracy (%)");
        for r in &self.rows {
            let _ = writeln!(out, "{:>5}  {:>12}", r.dim, format_cell(100.0 * r.mean, 100.0 * r.std));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep serializes")
    }

    pub fn means(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean).collect()
    }
}

/// Writes `sweep.json`, `sweep.csv` and `sweep.txt` into `dir`.
pub fn emit_sweep(table: &SweepTable, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_file(&dir.join("sweep.json"), &table.to_json())?;
    write_file(&dir.join("sweep.csv"), &table.to_csv())?;
    write_file(&dir.join("sweep.txt"), &table.to_table())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitStudyRow {
    pub dim: usize,
    pub init_seed: u64,
    pub final_error: f64,
    pub mean_accuracy: f64,
}

/// Spread of accuracy and mean reconstruction error over the inits of one dim.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimStability {
    pub dim: usize,
    pub inits: usize,
    pub accuracy_min: f64,
    pub accuracy_max: f64,
    pub accuracy_spread: f64,
    pub mean_accuracy: f64,
    pub mean_final_error: f64,
    pub std_final_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitStudy {
    pub split_hash: String,
    pub rows: Vec<InitStudyRow>,
}

impl InitStudy {
    /// One entry per dim, in increasing dim order.
    pub fn stability(&self) -> Vec<DimStability> {
        let accs = group_by_dim(&self.rows, |r| r.mean_accuracy);
        let errs = group_by_dim(&self.rows, |r| r.final_error);
        accs.into_iter()
            .map(|(dim, a)| {
                let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (mean_acc, _) = mean_std(&a);
                let (mean_err, std_err) = mean_std(&errs[&dim]);
                DimStability {
                    dim,
                    inits: a.len(),
                    accuracy_min: lo,
                    accuracy_max: hi,
                    accuracy_spread: hi - lo,
                    mean_accuracy: mean_acc,
                    mean_final_error: mean_err,
                    std_final_error: std_err,
                }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,init_seed,final_error,mean_accuracy\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.dim,
                r.init_seed,
                format_exact(r.final_error),
                format_exact(r.mean_accuracy)
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>5}  {:>5}  {:>14}  {:>12}  {:>10}\n",
            "dim", "inits", "error", "accuracy (%)", "spread"
        );
        for s in self.stability() {
            let _ = writeln!(
                out,
                "{:>5}  {:>5}  {:>14.6}  {:>12.2}  {:>10.2}",
                s.dim,
                s.inits,
                s.mean_final_error,
                100.0 * s.mean_accuracy,
                100.0 * s.accuracy_spread
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("init study serializes")
    }
}

/// Writes `init_study.json`, `init_study.csv` and `init_study.txt` into `dir`.
pub fn emit_init_study(study: &InitStudy, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    create_dir(dir)?;
    write_file(&dir.join("init_study.json"), &study.to_json())?;
    write_file(&dir.join("init_study.csv"), &study.to_csv())?;
    write_file(&dir.join("init_study.txt"), &study.to_table())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ExperimentReport {
        ExperimentReport {
            config: ExperimentConfig::new(3, 1, vec![MethodName::Svd]),
            dataset: DatasetSummary {
                samples: 8,
                features: 2,
                class_names: vec!["a".into(), "b".into()],
                class_sizes: vec![4, 4],
            },
            methods: vec![MethodResult {
                method: MethodName::Svd,
                dims: 2,
                mean: 0.58684,
                std: 0.03749,
                accuracies: vec![0.55, 0.62368],
                wall_time_secs: 0.125,
            }],
            split_hashes: vec!["ab".into(), "cd".into()],
            pairwise: vec![],
        }
    }

    #[test]
    fn cell_format() {
        assert_eq!(format_cell(58.684, 3.749), "58.68±3.75");
        assert_eq!(format_cell(100.0, 0.0), "100.00±0.00");
        assert_eq!(format_cell(7.0, 0.005), "7.00±0.01");
    }

    #[test]
    fn table_shows_percent_cells() {
        let t = minimal().to_table();
        assert!(t.contains("58.68±3.75"), "{t}");
        assert!(t.lines().next().unwrap().starts_with("method"));
        assert!(!t.contains("0.125"));
    }

    #[test]
    fn json_round_trip() {
        let r = minimal();
        assert_eq!(ExperimentReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn infinite_z_round_trips() {
        let mut r = minimal();
        r.pairwise.push(PairwiseTest {
            a: MethodName::Svd,
            b: MethodName::Lda,
            z: f64::NEG_INFINITY,
            p: 0.0,
        });
        let text = r.to_json();
        assert!(text.contains("\"-inf\""));
        assert_eq!(ExperimentReport::from_json(&text).unwrap(), r);
    }

    #[test]
    fn emit_writes_files_and_reports_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        emit_report(&minimal(), dir.path().join("out")).unwrap();
        let back = std::fs::read_to_string(dir.path().join("out/report.json")).unwrap();
        assert_eq!(ExperimentReport::from_json(&back).unwrap(), minimal());
        assert!(dir.path().join("out/report.txt").exists());

        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        assert!(matches!(emit_report(&minimal(), blocker.join("sub")), Err(Error::Io { .. })));
    }

    #[test]
    fn sweep_csv_has_exact_numbers() {
        let t = SweepTable {
            method: MethodName::Svd,
            rows: vec![SweepRow {
                dim: 5,
                mean: 0.1,
                std: 0.0,
                accuracies: vec![0.1],
                split_hashes: vec!["x".into()],
            }],
        };
        let csv = t.to_csv();
        let line = csv.lines().nth(1).unwrap();
        let mean: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(mean, 0.1);
    }

    #[test]
    fn stability_aggregates_per_dim() {
        let row = |dim, seed, e, a| InitStudyRow {
            dim,
            init_seed: seed,
            final_error: e,
            mean_accuracy: a,
        };
        let s = InitStudy {
            split_hash: String::new(),
            rows: vec![
                row(30, 0, 1.0, 0.7),
                row(15, 0, 2.0, 0.6),
                row(15, 1, 4.0, 0.65),
                row(30, 1, 3.0, 0.7),
            ],
        }
        .stability();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].dim, 15);
        assert!((s[0].accuracy_spread - 0.05).abs() < 1e-12);
        assert_eq!(s[0].mean_final_error, 3.0);
        assert_eq!(s[1].accuracy_spread, 0.0);
        assert_eq!(s[1].mean_final_error, 2.0);
    }
}
