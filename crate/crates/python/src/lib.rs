//! Python bindings for the `dtree-kmeans` core crate.
//!
//! Indices are zero-based on the Python side, as in the Rust API.

use std::collections::{BTreeMap, HashMap};

use dtree_kmeans::dataset::{ColumnSelector, LoadOptions};
use dtree_kmeans::dissimilarity::{self, CombineMode, DissimilarityMatrix};
use dtree_kmeans::evaluation::InitMethod;
use dtree_kmeans::seeding::{self, Centroids, SeedConfig, SeedMethod};
use dtree_kmeans::{kmeans, spanning_tree, BenchConfig, Error, LloydConfig};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn combine_mode(name: &str) -> PyResult<CombineMode> {
    match name {
        "mean" => Ok(CombineMode::Mean),
        "root_sum_square" => Ok(CombineMode::RootSumSquare),
        other => Err(PyValueError::new_err(format!("unknown combine mode {other:?}"))),
    }
}

fn seed_config(
    combine: &str,
    range_overrides: Option<HashMap<usize, f64>>,
    zero_zero_skip: bool,
) -> PyResult<SeedConfig> {
    Ok(SeedConfig {
        combine_mode: combine_mode(combine)?,
        range_overrides: range_overrides.unwrap_or_default().into_iter().collect(),
        zero_zero_skip,
    })
}

fn matrix_rows(dm: &DissimilarityMatrix) -> Vec<Vec<f64>> {
    (0..dm.n()).map(|a| dm.row(a).to_vec()).collect()
}

type PyEdge = (usize, usize, f64);
type PyPartition = (Vec<PyEdge>, Vec<PyEdge>, Vec<Vec<usize>>);

fn edges(list: &[spanning_tree::Edge]) -> Vec<PyEdge> {
    list.iter().map(|e| (e.u, e.v, e.weight)).collect()
}

#[derive(FromPyObject)]
enum LabelColumn {
    Index(usize),
    Name(String),
}

#[pyclass(name = "Dataset", module = "dtkmeans", frozen)]
struct PyDataset {
    inner: dtree_kmeans::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Rows of floats; `None` marks a missing value.
    #[new]
    #[pyo3(signature = (rows, labels=None, feature_names=None))]
    fn new(
        rows: Vec<Vec<Option<f64>>>,
        labels: Option<Vec<String>>,
        feature_names: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let mut d = dtree_kmeans::Dataset::from_optional_rows(rows).map_err(to_py)?;
        if let Some(l) = labels {
            d = d.with_labels(l).map_err(to_py)?;
        }
        if let Some(names) = feature_names {
            d = d.with_feature_names(names).map_err(to_py)?;
        }
        Ok(Self { inner: d })
    }

    #[staticmethod]
    #[pyo3(signature = (path, has_header=None, label_column=None, missing_token=""))]
    fn load_csv(
        path: &str,
        has_header: Option<bool>,
        label_column: Option<LabelColumn>,
        missing_token: &str,
    ) -> PyResult<Self> {
        let options = LoadOptions {
            has_header,
            label_column: label_column.map(|c| match c {
                LabelColumn::Index(i) => ColumnSelector::Index(i),
                LabelColumn::Name(s) => ColumnSelector::Name(s),
            }),
            missing_token: missing_token.to_owned(),
        };
        dtree_kmeans::Dataset::load_csv(path, &options)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn labels(&self) -> Option<Vec<String>> {
        self.inner.labels().map(<[String]>::to_vec)
    }

    #[getter]
    fn feature_names(&self) -> Option<Vec<String>> {
        self.inner.feature_names().map(<[String]>::to_vec)
    }

    fn rows(&self) -> Vec<Vec<Option<f64>>> {
        let d = &self.inner;
        (0..d.n())
            .map(|i| (0..d.m()).map(|f| d.value(i, f)).collect())
            .collect()
    }

    /// `(min, max, range)` lists; unobserved features report NaN bounds.
    #[pyo3(signature = (overrides=None))]
    fn feature_ranges(
        &self,
        overrides: Option<HashMap<usize, f64>>,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let o: BTreeMap<usize, f64> = overrides.unwrap_or_default().into_iter().collect();
        let r = self.inner.feature_ranges(&o).map_err(to_py)?;
        Ok((r.min, r.max, r.range))
    }

    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

#[pyclass(name = "ClusteringResult", module = "dtkmeans", frozen, get_all)]
struct PyClusteringResult {
    assignments: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    sse_trace: Vec<f64>,
    iterations: usize,
    converged: bool,
}

#[pymethods]
impl PyClusteringResult {
    fn __repr__(&self) -> String {
        format!(
            "ClusteringResult(k={}, iterations={}, converged={})",
            self.centroids.len(),
            self.iterations,
            self.converged
        )
    }
}

#[pyfunction]
#[pyo3(signature = (dataset, combine="mean", range_overrides=None, zero_zero_skip=true))]
fn combined_matrix(
    dataset: &PyDataset,
    combine: &str,
    range_overrides: Option<HashMap<usize, f64>>,
    zero_zero_skip: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = seed_config(combine, range_overrides, zero_zero_skip)?;
    let d = &dataset.inner;
    let ranges = d.feature_ranges(&cfg.range_overrides).map_err(to_py)?;
    let dm = dissimilarity::combined_matrix(d, &ranges, &cfg.dissimilarity_options()).map_err(to_py)?;
    Ok(matrix_rows(&dm))
}

#[pyfunction]
#[pyo3(signature = (dataset, feature, range_overrides=None, zero_zero_skip=true))]
fn feature_matrix(
    dataset: &PyDataset,
    feature: usize,
    range_overrides: Option<HashMap<usize, f64>>,
    zero_zero_skip: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let d = &dataset.inner;
    let o: BTreeMap<usize, f64> = range_overrides.unwrap_or_default().into_iter().collect();
    let ranges = d.feature_ranges(&o).map_err(to_py)?;
    let fm = dissimilarity::feature_matrix(d, feature, &ranges, zero_zero_skip).map_err(to_py)?;
    Ok(matrix_rows(&fm.matrix))
}

/// Minimum spanning tree of a square dissimilarity matrix as `(u, v, weight)` edges.
#[pyfunction]
fn minimum_spanning_tree(matrix: Vec<Vec<f64>>) -> PyResult<Vec<PyEdge>> {
    let n = matrix.len();
    if matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let dm = DissimilarityMatrix::from_values(n, matrix.concat()).map_err(to_py)?;
    let tree = spanning_tree::build_mst(&dm).map_err(to_py)?;
    Ok(edges(tree.edges()))
}

/// Tree, pruned edges and components of the tree seeding for `k` clusters.
#[pyfunction]
#[pyo3(signature = (dataset, k, combine="mean", range_overrides=None, zero_zero_skip=true))]
fn tree_partition(
    dataset: &PyDataset,
    k: usize,
    combine: &str,
    range_overrides: Option<HashMap<usize, f64>>,
    zero_zero_skip: bool,
) -> PyResult<PyPartition> {
    let cfg = seed_config(combine, range_overrides, zero_zero_skip)?;
    let s = seeding::tree_seed_detailed(&dataset.inner, k, &cfg).map_err(to_py)?;
    let tree = s.tree.as_ref().map_or_else(Vec::new, |t| edges(t.edges()));
    let pruned = s.forest.as_ref().map_or_else(Vec::new, |f| edges(f.pruned()));
    Ok((tree, pruned, s.components))
}

#[pyfunction]
#[pyo3(signature = (dataset, k, combine="mean", range_overrides=None, zero_zero_skip=true))]
fn tree_seed(
    dataset: &PyDataset,
    k: usize,
    combine: &str,
    range_overrides: Option<HashMap<usize, f64>>,
    zero_zero_skip: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = seed_config(combine, range_overrides, zero_zero_skip)?;
    let c = seeding::tree_seed(&dataset.inner, k, &cfg).map_err(to_py)?;
    Ok(c.to_rows())
}

#[pyfunction]
fn random_centroids(dataset: &PyDataset, k: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let c = seeding::random_centroids(&dataset.inner, k, seed).map_err(to_py)?;
    Ok(c.to_rows())
}

#[pyfunction]
#[pyo3(signature = (dataset, centroids, max_iterations=100, tolerance=0.0))]
fn lloyd(
    dataset: &PyDataset,
    centroids: Vec<Vec<f64>>,
    max_iterations: usize,
    tolerance: f64,
) -> PyResult<PyClusteringResult> {
    let init = Centroids::from_rows(&centroids, SeedMethod::External).map_err(to_py)?;
    let cfg = LloydConfig {
        max_iterations,
        centroid_tolerance: tolerance,
        ..Default::default()
    };
    let r = kmeans::lloyd(&dataset.inner, &init, &cfg).map_err(to_py)?;
    Ok(PyClusteringResult {
        centroids: r.centroids.to_rows(),
        assignments: r.assignments,
        sse_trace: r.sse_trace,
        iterations: r.iterations,
        converged: r.converged,
    })
}

#[pyfunction]
fn purity_accuracy(assignments: Vec<usize>, labels: Vec<String>) -> PyResult<f64> {
    dtree_kmeans::purity_accuracy(&assignments, &labels).map_err(to_py)
}

/// Runs the comparison benchmark and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (dataset, k, methods=vec!["random".to_owned(), "tree".to_owned()], runs=10, base_seed=0, name="dataset", timing=true))]
fn benchmark_json(
    dataset: &PyDataset,
    k: usize,
    methods: Vec<String>,
    runs: usize,
    base_seed: u64,
    name: &str,
    timing: bool,
) -> PyResult<String> {
    let methods = methods
        .iter()
        .map(|m| m.parse::<InitMethod>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(to_py)?;
    let cfg = BenchConfig {
        seed: SeedConfig::new(),
        lloyd: LloydConfig::default(),
    };
    let mut report =
        dtree_kmeans::benchmark(&dataset.inner, name, k, &methods, runs, base_seed, &cfg)
            .map_err(to_py)?;
    if !timing {
        report = report.without_timing();
    }
    Ok(report.to_json())
}

#[pymodule]
fn dtkmeans(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyClusteringResult>()?;
    m.add_function(wrap_pyfunction!(combined_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(feature_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(minimum_spanning_tree, m)?)?;
    m.add_function(wrap_pyfunction!(tree_partition, m)?)?;
    m.add_function(wrap_pyfunction!(tree_seed, m)?)?;
    m.add_function(wrap_pyfunction!(random_centroids, m)?)?;
    m.add_function(wrap_pyfunction!(lloyd, m)?)?;
    m.add_function(wrap_pyfunction!(purity_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_json, m)?)?;
    Ok(())
}
