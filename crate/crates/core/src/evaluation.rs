//! Clustering accuracy and the repeated-run comparison benchmark.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::hash::Hash;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kmeans::{lloyd, LloydConfig};
use crate::seeding::{random_centroids, tree_seed, SeedConfig};

/// Cluster purity: every cluster votes for its majority label, and the
/// accuracy is the fraction of objects carrying their cluster's label.
pub fn purity_accuracy<L: Eq + Hash>(assignments: &[usize], labels: &[L]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: assignments.len(),
            right: labels.len(),
        });
    }
    if assignments.is_empty() {
        return Err(Error::Empty("no objects to score"));
    }
    let mut counts: HashMap<usize, HashMap<&L, usize>> = HashMap::new();
    for (&cluster, label) in assignments.iter().zip(labels) {
        *counts.entry(cluster).or_default().entry(label).or_default() += 1;
    }
    let matched: usize = counts
        .values()
        .map(|by_label| by_label.values().copied().max().unwrap_or(0))
        .sum();
    Ok(matched as f64 / assignments.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMethod {
    Random,
    Tree,
}

impl InitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMethod::Random => "random",
            InitMethod::Tree => "tree",
        }
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitMethod::Random),
            "tree" => Ok(InitMethod::Tree),
            other => Err(Error::Config(format!("unknown init method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchConfig {
    pub seed: SeedConfig,
    pub lloyd: LloydConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    /// Generator seed; `None` for the deterministic tree method.
    pub seed: Option<u64>,
    pub accuracy: f64,
    pub runtime_secs: f64,
    pub iterations: usize,
    pub sse: f64,
    pub converged: bool,
    pub assignments: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodRecord {
    pub method: InitMethod,
    pub runs: Vec<RunRecord>,
    pub mean_accuracy: f64,
    pub mean_runtime_secs: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub k: usize,
    pub base_seed: u64,
    pub methods: Vec<MethodRecord>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    sum / count as f64
}

impl MethodRecord {
    fn from_runs(method: InitMethod, runs: Vec<RunRecord>) -> Self {
        Self {
            method,
            mean_accuracy: mean(runs.iter().map(|r| r.accuracy)),
            mean_runtime_secs: mean(runs.iter().map(|r| r.runtime_secs)),
            mean_iterations: mean(runs.iter().map(|r| r.iterations as f64)),
            runs,
        }
    }
}

impl EvaluationReport {
    pub fn method(&self, method: InitMethod) -> Option<&MethodRecord> {
        self.methods.iter().find(|r| r.method == method)
    }

    /// Zeroes every runtime field so reports compare byte for byte.
    pub fn without_timing(mut self) -> Self {
        for record in &mut self.methods {
            for run in &mut record.runs {
                run.runtime_secs = 0.0;
            }
            record.mean_runtime_secs = 0.0;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per method: mean time with 4 decimals, mean accuracy as a
    /// percentage with 1 decimal.
    pub fn to_summary_csv(&self) -> String {
        let mut out = String::from("dataset,k,method,execution_time_sec,accuracy_pct\n");
        for r in &self.methods {
            writeln!(
                out,
                "{},{},{},{:.4},{:.1}",
                self.dataset,
                self.k,
                r.method,
                r.mean_runtime_secs,
                r.mean_accuracy * 100.0
            )
            .expect("write to String");
        }
        out
    }
}

/// Runs every method `runs` times and scores each run against the labels.
///
/// The random method uses seed `base_seed + run`. Timing covers seeding and
/// Lloyd iterations, including matrix and tree construction for the tree
/// method.
pub fn benchmark(
    d: &Dataset,
    name: &str,
    k: usize,
    methods: &[InitMethod],
    runs: usize,
    base_seed: u64,
    cfg: &BenchConfig,
) -> Result<EvaluationReport> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    if k == 0 || k > d.n() {
        return Err(Error::InvalidK { k, n: d.n() });
    }
    if runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    if methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }

    let mut records = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut run_records = Vec::with_capacity(runs);
        for run in 0..runs {
            let seed = match method {
                InitMethod::Random => Some(base_seed.wrapping_add(run as u64)),
                InitMethod::Tree => None,
            };
            let start = Instant::now();
            let init = match seed {
                Some(s) => random_centroids(d, k, s)?,
                None => tree_seed(d, k, &cfg.seed)?,
            };
            let result = lloyd(d, &init, &cfg.lloyd)?;
            let runtime_secs = start.elapsed().as_secs_f64();
            run_records.push(RunRecord {
                run,
                seed,
                accuracy: purity_accuracy(&result.assignments, labels)?,
                runtime_secs,
                iterations: result.iterations,
                sse: result.final_sse(),
                converged: result.converged,
                assignments: result.assignments,
            });
        }
        records.push(MethodRecord::from_runs(method, run_records));
    }
    Ok(EvaluationReport {
        dataset: name.to_owned(),
        k,
        base_seed,
        methods: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn purity_examples() {
        assert_eq!(purity_accuracy(&[0, 0, 1, 1], &["a", "a", "b", "b"]).unwrap(), 1.0);
        assert_eq!(purity_accuracy(&[0, 0, 1, 1], &["a", "a", "a", "b"]).unwrap(), 0.75);
        assert_eq!(purity_accuracy(&[0, 0, 0], &["a", "a", "b"]).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn purity_errors() {
        assert!(matches!(purity_accuracy(&[0], &["a", "b"]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(purity_accuracy::<&str>(&[], &[]), Err(Error::Empty(_))));
    }

    fn labelled() -> Dataset {
        Dataset::from_rows(vec![
            vec![0.0, 0.0],
            vec![0.1, 0.2],
            vec![0.2, 0.1],
            vec![5.0, 5.0],
            vec![5.1, 5.2],
            vec![5.2, 4.9],
        ])
        .unwrap()
        .with_labels(["a", "a", "a", "b", "b", "b"].map(String::from).to_vec())
        .unwrap()
    }

    #[test]
    fn single_run_report() {
        let d = labelled();
        let r = benchmark(&d, "toy", 2, &[InitMethod::Tree], 1, 0, &BenchConfig::default()).unwrap();
        assert_eq!(r.methods.len(), 1);
        let m = &r.methods[0];
        assert_eq!(m.runs.len(), 1);
        assert_eq!(m.mean_accuracy, m.runs[0].accuracy);
        assert_eq!(m.mean_runtime_secs, m.runs[0].runtime_secs);
        assert_eq!(m.mean_accuracy, 1.0);
    }

    #[test]
    fn benchmark_errors() {
        let unlabelled = Dataset::from_rows(vec![vec![1.0], vec![2.0]]).unwrap();
        let cfg = BenchConfig::default();
        assert!(matches!(
            benchmark(&unlabelled, "x", 1, &[InitMethod::Tree], 1, 0, &cfg),
            Err(Error::MissingLabels)
        ));
        let d = labelled();
        assert!(matches!(
            benchmark(&d, "x", 7, &[InitMethod::Tree], 1, 0, &cfg),
            Err(Error::InvalidK { .. })
        ));
        assert!(benchmark(&d, "x", 2, &[InitMethod::Tree], 0, 0, &cfg).is_err());
    }

    #[test]
    fn summary_csv_format() {
        let d = labelled();
        let r = benchmark(
            &d,
            "toy",
            2,
            &[InitMethod::Random, InitMethod::Tree],
            3,
            5,
            &BenchConfig::default(),
        )
        .unwrap()
        .without_timing();
        let csv = r.to_summary_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "dataset,k,method,execution_time_sec,accuracy_pct");
        assert_eq!(lines[2], "toy,2,tree,0.0000,100.0");
        assert_eq!(r.method(InitMethod::Random).unwrap().runs[2].seed, Some(7));
    }
}
