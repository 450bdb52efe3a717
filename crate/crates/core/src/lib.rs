//! K-means clustering with deterministic dissimilarity-tree seeding.
//!
//! The seeding pipeline builds a range-normalized dissimilarity matrix over
//! all objects, takes its minimum spanning tree, cuts the `k - 1` heaviest
//! edges and uses the mean of every resulting sub-tree as an initial
//! centroid. Lloyd iterations then refine the centroids on the raw features.
//!
//! * [`dataset`] loads and characterizes CSV input.
//! * [`dissimilarity`] computes per-feature and combined matrices.
//! * [`spanning_tree`] builds and prunes the minimum spanning tree.
//! * [`seeding`] turns sub-trees (or random draws) into centroids.
//! * [`kmeans`] runs Lloyd's algorithm.
//! * [`evaluation`] scores clusterings and runs the comparison benchmark.
//! * [`cli`] is the batch front end used by the `dtree-kmeans` binary.

pub mod cli;
pub mod dataset;
pub mod dissimilarity;
mod error;
pub mod evaluation;
pub mod kmeans;
pub mod seeding;
pub mod spanning_tree;
pub mod union_find;

pub use dataset::{ColumnSelector, Dataset, Diagnostic, LoadOptions, RangeVector};
pub use dissimilarity::{CombineMode, DissimilarityMatrix, DissimilarityOptions, Provenance};
pub use error::{Error, Result};
pub use evaluation::{benchmark, purity_accuracy, BenchConfig, EvaluationReport, InitMethod};
pub use kmeans::{lloyd, ClusteringResult, LloydConfig};
pub use seeding::{random_centroids, tree_seed, Centroids, SeedConfig, SeedMethod};
pub use spanning_tree::{build_mst, prune_heaviest, Edge, Forest, SpanningTree};
