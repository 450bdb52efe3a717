//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use dtree_kmeans::{ColumnSelector, Dataset, LoadOptions, SeedConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TABLE1: [[f64; 3]; 10] = [
    [2.0, 5.0, 6.0],
    [7.0, 1.0, 2.0],
    [3.0, 6.0, 4.0],
    [1.0, 8.0, 0.0],
    [1.0, 9.0, 2.0],
    [5.0, 2.0, 6.0],
    [8.0, 2.0, 3.0],
    [4.0, 6.0, 1.0],
    [6.0, 4.0, 5.0],
    [9.0, 3.0, 7.0],
];

pub fn manifest_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

pub fn table1() -> Dataset {
    Dataset::from_rows(TABLE1.iter().map(|r| r.to_vec()).collect()).unwrap()
}

/// Seeding settings that reproduce the printed example: mean combination
/// and a normalizing range of 8 for the third feature.
pub fn table1_cfg() -> SeedConfig {
    SeedConfig {
        range_overrides: BTreeMap::from([(2, 8.0)]),
        ..SeedConfig::new()
    }
}

pub fn load_labelled(file: &str) -> Dataset {
    let opts = LoadOptions {
        has_header: Some(true),
        label_column: Some(ColumnSelector::Name("class".into())),
        ..Default::default()
    };
    Dataset::load_csv(manifest_path(&format!("data/{file}")), &opts).unwrap()
}

pub fn iris() -> Dataset {
    load_labelled("iris.csv")
}

pub fn wine() -> Dataset {
    load_labelled("wine.csv")
}

pub fn read_matrix(name: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(manifest_path(&format!("tests/data/{name}"))).unwrap();
    text.lines()
        .map(|l| l.split(',').map(|c| c.trim().parse().unwrap()).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub matrix: String,
    pub row: usize,
    pub col: usize,
    pub printed: f64,
    pub recomputed: f64,
}

/// Printed entries known to disagree with recomputation (1-based, upper triangle).
pub fn exclusions(matrix: &str) -> Vec<Exclusion> {
    let text =
        std::fs::read_to_string(manifest_path("tests/data/printed_exclusions.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.splitn(6, ',').collect();
            Exclusion {
                matrix: c[0].into(),
                row: c[1].parse().unwrap(),
                col: c[2].parse().unwrap(),
                printed: c[3].parse().unwrap(),
                recomputed: c[4].parse().unwrap(),
            }
        })
        .filter(|e| e.matrix == matrix)
        .collect()
}

/// Per-feature and mean dissimilarities recomputed straight from the table
/// with a divisor of 8 on every feature, for pair `(a, b)` (0-based).
pub fn table1_oracle_feature(a: usize, b: usize, f: usize) -> f64 {
    (TABLE1[a][f] - TABLE1[b][f]).abs() / 8.0
}

pub fn table1_oracle_mean(a: usize, b: usize) -> f64 {
    (0..3).map(|f| table1_oracle_feature(a, b, f)).sum::<f64>() / 3.0
}

/// Prim's algorithm on a dense weight matrix; returns the weights of the
/// tree edges sorted ascending. The sorted multiset is the same for every
/// minimum spanning tree of the graph.
pub fn prim_weights(n: usize, w: &[f64]) -> Vec<f64> {
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for step in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        if step > 0 {
            out.push(best[u]);
        }
        for v in 0..n {
            if !in_tree[v] && w[u * n + v] < best[v] {
                best[v] = w[u * n + v];
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Random symmetric weights in `[0, 1]`; `coarse` quantizes to steps of
/// 0.05 so that many weights tie.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, coarse: bool) -> Vec<f64> {
    let mut w = vec![0.0; n * n];
    for a in 0..n {
        for b in a + 1..n {
            let x: f64 = rng.random();
            let x = if coarse { (x * 20.0).round() / 20.0 } else { x };
            w[a * n + b] = x;
            w[b * n + a] = x;
        }
    }
    w
}

/// A blob-structured random dataset with complete values.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Dataset {
    let blobs = rng.random_range(1..=4);
    let centers: Vec<Vec<f64>> = (0..blobs)
        .map(|_| (0..m).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let rows = (0..n)
        .map(|_| {
            let c = &centers[rng.random_range(0..blobs)];
            c.iter().map(|x| x + rng.random_range(-2.0..2.0)).collect()
        })
        .collect();
    Dataset::from_rows(rows).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
