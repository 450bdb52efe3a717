//! Batch command-line front end.
//!
//! Object, feature and cluster numbers are 1-based on the command line and
//! in every emitted artifact. Exit codes: 0 success, 1 usage error, 2 data
//! error, 3 internal invariant failure. All artifacts are rendered in memory
//! before anything is written, so a failing run leaves no partial files.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dataset::{ColumnSelector, Dataset, LoadOptions};
use crate::dissimilarity::{combined_matrix, feature_matrix, CombineMode};
use crate::error::Error;
use crate::evaluation::{benchmark, BenchConfig, InitMethod};
use crate::kmeans::{lloyd, ClusteringResult, LloydConfig};
use crate::seeding::{random_centroids, tree_seed, tree_seed_detailed, Centroids, SeedConfig};
use crate::spanning_tree::Edge;

#[derive(Debug, Parser)]
#[command(name = "dtree-kmeans", version, about = "K-means with dissimilarity-tree seeding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the combined (or one per-feature) dissimilarity matrix as CSV.
    Dissim {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        dissim: DissimArgs,
        /// 1-based feature whose single-feature matrix is emitted.
        #[arg(long)]
        feature: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the minimum dissimilarity tree, the pruned edges and the components.
    Mst {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        dissim: DissimArgs,
        #[arg(long, value_parser = parse_k)]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit initial centroids as CSV.
    Seed {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        dissim: DissimArgs,
        #[command(flatten)]
        init: InitArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Seed and run Lloyd's algorithm.
    Cluster {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        dissim: DissimArgs,
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        lloyd: LloydArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Assignments CSV (or the full JSON result).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Final centroids CSV.
        #[arg(long)]
        centroids: Option<PathBuf>,
        /// Per-iteration criterion CSV.
        #[arg(long)]
        sse_trace: Option<PathBuf>,
    },
    /// Compare initialization methods over repeated runs against labels.
    Bench {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        dissim: DissimArgs,
        #[arg(long, value_parser = parse_k)]
        k: usize,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Base seed; random run `i` uses `seed + i`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "random,tree")]
        methods: Vec<InitArg>,
        #[command(flatten)]
        lloyd: LloydArgs,
        /// Dataset name in the report; defaults to the input file stem.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Zero all runtime fields.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    header: HeaderArg,
    /// 1-based column index or header name of the class labels.
    #[arg(long)]
    label_col: Option<String>,
    #[arg(long, default_value = "")]
    missing_token: String,
}

#[derive(Debug, Args)]
struct DissimArgs {
    #[arg(long, value_enum, default_value_t = CombineArg::Mean)]
    combine: CombineArg,
    /// Replace a feature's normalizing range, as `FEATURE=VALUE` (1-based).
    #[arg(long = "range-override", value_name = "F=VALUE", value_parser = parse_override)]
    range_overrides: Vec<(usize, f64)>,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    zero_zero_skip: bool,
}

#[derive(Debug, Args)]
struct InitArgs {
    #[arg(long, value_parser = parse_k)]
    k: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Tree)]
    init: InitArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct LloydArgs {
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    max_iter: u64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_tol)]
    tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CombineArg {
    Mean,
    RootSumSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Tree,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_k(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if k == 0 {
        return Err("k must be ≥ 1".into());
    }
    Ok(k)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t >= 0.0 && t.is_finite() => Ok(t),
        _ => Err("tolerance must be a non-negative number".into()),
    }
}

fn parse_override(s: &str) -> Result<(usize, f64), String> {
    let (f, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected FEATURE=VALUE, got {s:?}"))?;
    let f: usize = f.trim().parse().map_err(|_| format!("bad feature number {f:?}"))?;
    if f == 0 {
        return Err("feature numbers start at 1".into());
    }
    let v: f64 = v.trim().parse().map_err(|_| format!("bad range value {v:?}"))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(format!("range override must be positive, got {v}"));
    }
    Ok((f - 1, v))
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(Error::Invariant(_)) => 3,
            Failure::Data(_) => 2,
        }
    }
}

/// One rendered artifact: `None` path means stdout.
struct Artifact {
    path: Option<PathBuf>,
    contents: String,
}

impl InputArgs {
    fn options(&self) -> Result<LoadOptions, Failure> {
        let label_column = match &self.label_col {
            None => None,
            Some(s) => match s.parse::<usize>() {
                Ok(0) => return Err(Failure::Usage("column numbers start at 1".into())),
                Ok(i) => Some(ColumnSelector::Index(i - 1)),
                Err(_) => Some(ColumnSelector::Name(s.clone())),
            },
        };
        Ok(LoadOptions {
            has_header: match self.header {
                HeaderArg::Auto => None,
                HeaderArg::Yes => Some(true),
                HeaderArg::No => Some(false),
            },
            label_column,
            missing_token: self.missing_token.clone(),
        })
    }

    fn load(&self, stderr: &mut dyn Write) -> Result<Dataset, Failure> {
        let d = Dataset::load_csv(&self.input, &self.options()?)?;
        for diag in d.validate() {
            let _ = writeln!(stderr, "warning: {diag}");
        }
        Ok(d)
    }
}

impl DissimArgs {
    fn seed_config(&self, d: &Dataset) -> Result<SeedConfig, Failure> {
        let mut range_overrides = BTreeMap::new();
        for &(f, v) in &self.range_overrides {
            if f >= d.m() {
                return Err(Failure::Data(Error::IndexOutOfRange {
                    what: "features",
                    index: f + 1,
                    size: d.m(),
                }));
            }
            range_overrides.insert(f, v);
        }
        Ok(SeedConfig {
            combine_mode: match self.combine {
                CombineArg::Mean => CombineMode::Mean,
                CombineArg::RootSumSquare => CombineMode::RootSumSquare,
            },
            range_overrides,
            zero_zero_skip: self.zero_zero_skip,
        })
    }
}

impl LloydArgs {
    fn config(&self) -> LloydConfig {
        LloydConfig {
            max_iterations: usize::try_from(self.max_iter).unwrap_or(usize::MAX),
            centroid_tolerance: self.tol,
            ..Default::default()
        }
    }
}

fn initial_centroids(
    d: &Dataset,
    init: &InitArgs,
    cfg: &SeedConfig,
) -> Result<Centroids, Failure> {
    Ok(match init.init {
        InitArg::Tree => tree_seed(d, init.k, cfg)?,
        InitArg::Random => random_centroids(d, init.k, init.seed)?,
    })
}

fn edge_line(out: &mut String, e: &Edge) {
    writeln!(out, "{} {} {:.6}", e.u + 1, e.v + 1, e.weight).expect("write to String");
}

fn assignments_csv(r: &ClusteringResult) -> String {
    let mut out = String::from("object,cluster\n");
    for (i, j) in r.assignments.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, j + 1).expect("write to String");
    }
    out
}

fn sse_csv(r: &ClusteringResult) -> String {
    let mut out = String::from("iteration,sse\n");
    for (t, e) in r.sse_trace.iter().enumerate() {
        writeln!(out, "{},{e:.6}", t + 1).expect("write to String");
    }
    out
}

#[derive(Serialize)]
struct ClusterJson<'a> {
    k: usize,
    init: &'a str,
    seed: Option<u64>,
    iterations: usize,
    converged: bool,
    sse: f64,
    /// 1-based.
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse_trace: &'a [f64],
}

fn execute(command: &Command, stderr: &mut dyn Write) -> Result<Vec<Artifact>, Failure> {
    match command {
        Command::Dissim {
            input,
            dissim,
            feature,
            output,
        } => {
            let d = input.load(stderr)?;
            let cfg = dissim.seed_config(&d)?;
            let ranges = d.feature_ranges(&cfg.range_overrides)?;
            let matrix = match feature {
                Some(0) => return Err(Failure::Usage("feature numbers start at 1".into())),
                Some(f) => feature_matrix(&d, f - 1, &ranges, cfg.zero_zero_skip)?.matrix,
                None => {
                    let m = combined_matrix(&d, &ranges, &cfg.dissimilarity_options())?;
                    if !m.incomparable_pairs().is_empty() {
                        let _ = writeln!(
                            stderr,
                            "warning: {} object pairs share no comparable feature",
                            m.incomparable_pairs().len()
                        );
                    }
                    m
                }
            };
            Ok(vec![Artifact {
                path: output.clone(),
                contents: matrix.to_csv_string(),
            }])
        }
        Command::Mst {
            input,
            dissim,
            k,
            output,
        } => {
            let d = input.load(stderr)?;
            let cfg = dissim.seed_config(&d)?;
            let seeding = tree_seed_detailed(&d, *k, &cfg)?;
            let mut out = String::from("# tree\n");
            if let (Some(tree), Some(forest)) = (&seeding.tree, &seeding.forest) {
                for e in tree.edges() {
                    edge_line(&mut out, e);
                }
                out.push_str("# pruned\n");
                for e in forest.pruned() {
                    edge_line(&mut out, e);
                }
            } else {
                out.push_str("# pruned\n");
            }
            out.push_str("# components\n");
            for part in &seeding.components {
                let members: Vec<String> = part.iter().map(|i| (i + 1).to_string()).collect();
                writeln!(out, "{}", members.join(" ")).expect("write to String");
            }
            Ok(vec![Artifact {
                path: output.clone(),
                contents: out,
            }])
        }
        Command::Seed {
            input,
            dissim,
            init,
            output,
        } => {
            let d = input.load(stderr)?;
            let cfg = dissim.seed_config(&d)?;
            let c = initial_centroids(&d, init, &cfg)?;
            Ok(vec![Artifact {
                path: output.clone(),
                contents: c.to_csv_string(),
            }])
        }
        Command::Cluster {
            input,
            dissim,
            init,
            lloyd: lloyd_args,
            format,
            output,
            centroids,
            sse_trace,
        } => {
            let d = input.load(stderr)?;
            let cfg = dissim.seed_config(&d)?;
            let start = initial_centroids(&d, init, &cfg)?;
            let result = lloyd(&d, &start, &lloyd_args.config())?;
            if !result.converged {
                let _ = writeln!(
                    stderr,
                    "warning: not converged after {} iterations",
                    result.iterations
                );
            }
            let main = match format {
                Format::Csv => assignments_csv(&result),
                Format::Json => {
                    let json = ClusterJson {
                        k: init.k,
                        init: match init.init {
                            InitArg::Tree => "tree",
                            InitArg::Random => "random",
                        },
                        seed: (init.init == InitArg::Random).then_some(init.seed),
                        iterations: result.iterations,
                        converged: result.converged,
                        sse: result.final_sse(),
                        assignments: result.assignments.iter().map(|j| j + 1).collect(),
                        centroids: result.centroids.to_rows(),
                        sse_trace: &result.sse_trace,
                    };
                    serde_json::to_string_pretty(&json).expect("result serializes") + "\n"
                }
            };
            let mut artifacts = vec![Artifact {
                path: output.clone(),
                contents: main,
            }];
            if let Some(p) = centroids {
                artifacts.push(Artifact {
                    path: Some(p.clone()),
                    contents: result.centroids.to_csv_string(),
                });
            }
            if let Some(p) = sse_trace {
                artifacts.push(Artifact {
                    path: Some(p.clone()),
                    contents: sse_csv(&result),
                });
            }
            Ok(artifacts)
        }
        Command::Bench {
            input,
            dissim,
            k,
            runs,
            seed,
            methods,
            lloyd: lloyd_args,
            name,
            format,
            no_timing,
            output,
        } => {
            if input.label_col.is_none() {
                return Err(Failure::Usage("bench requires --label-col".into()));
            }
            if *runs == 0 {
                return Err(Failure::Usage("runs must be ≥ 1".into()));
            }
            let d = input.load(stderr)?;
            let cfg = BenchConfig {
                seed: dissim.seed_config(&d)?,
                lloyd: lloyd_args.config(),
            };
            let methods: Vec<InitMethod> = methods
                .iter()
                .map(|m| match m {
                    InitArg::Tree => InitMethod::Tree,
                    InitArg::Random => InitMethod::Random,
                })
                .collect();
            let name = name.clone().unwrap_or_else(|| stem(&input.input));
            let mut report = benchmark(&d, &name, *k, &methods, *runs, *seed, &cfg)?;
            if *no_timing {
                report = report.without_timing();
            }
            let contents = match format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_summary_csv(),
            };
            Ok(vec![Artifact {
                path: output.clone(),
                contents,
            }])
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn emit(artifacts: Vec<Artifact>, stdout: &mut dyn Write) -> Result<(), Failure> {
    for a in artifacts {
        match &a.path {
            None => stdout.write_all(a.contents.as_bytes()),
            Some(p) => std::fs::write(p, a.contents.as_bytes()),
        }
        .map_err(|source| {
            Failure::Data(Error::Io {
                path: a.path.clone().unwrap_or_else(|| "<stdout>".into()),
                source,
            })
        })?;
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the selected subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return 1;
        }
    };
    let outcome = execute(&cli.command, stderr).and_then(|artifacts| emit(artifacts, stdout));
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let code = f.exit_code();
            let message = match f {
                Failure::Usage(m) => m,
                Failure::Data(e) => e.to_string(),
            };
            let _ = writeln!(stderr, "error: {message}");
            code
        }
    }
}
