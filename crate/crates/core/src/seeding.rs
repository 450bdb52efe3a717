//! Initial centroids: dissimilarity-tree seeding and the random baseline.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{Dataset, RangeVector};
use crate::dissimilarity::{combined_matrix, CombineMode, DissimilarityMatrix, DissimilarityOptions};
use crate::error::{Error, Result};
use crate::spanning_tree::{build_mst, prune_heaviest, Forest, SpanningTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeedMethod {
    Tree,
    Random { seed: u64 },
    /// Centroids supplied by the caller or produced by an update step.
    External,
}

/// `k` centroids of dimension `m`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Centroids {
    k: usize,
    m: usize,
    points: Vec<f64>,
    method: SeedMethod,
}

impl Centroids {
    pub fn new(k: usize, m: usize, points: Vec<f64>, method: SeedMethod) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::Empty("centroids need k >= 1 and m >= 1"));
        }
        if points.len() != k * m {
            return Err(Error::DimensionMismatch {
                expected: k * m,
                found: points.len(),
            });
        }
        if let Some(bad) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "centroid {} has a non-finite coordinate",
                bad / m + 1
            )));
        }
        Ok(Self { k, m, points, method })
    }

    pub fn from_rows(rows: &[Vec<f64>], method: SeedMethod) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: r.len(),
            });
        }
        Self::new(rows.len(), m, rows.concat(), method)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.m..(j + 1) * self.m]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn method(&self) -> SeedMethod {
        self.method
    }

    pub(crate) fn with_method(mut self, method: SeedMethod) -> Self {
        self.method = method;
        self
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points.chunks(self.m).map(<[f64]>::to_vec).collect()
    }

    /// `k` lines of `m` comma-separated values with 6 decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 0..self.k {
            for (f, v) in self.point(j).iter().enumerate() {
                if f > 0 {
                    out.push(',');
                }
                write!(out, "{v:.6}").expect("write to String");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeedConfig {
    pub combine_mode: CombineMode,
    /// Zero-based feature index to replacement range.
    pub range_overrides: BTreeMap<usize, f64>,
    pub zero_zero_skip: bool,
}

impl SeedConfig {
    pub fn new() -> Self {
        Self {
            zero_zero_skip: true,
            ..Default::default()
        }
    }

    pub fn dissimilarity_options(&self) -> DissimilarityOptions {
        DissimilarityOptions {
            mode: self.combine_mode,
            zero_zero_skip: self.zero_zero_skip,
        }
    }
}

/// Every intermediate artifact of a tree seeding run.
#[derive(Debug, Clone)]
pub struct TreeSeeding {
    pub ranges: RangeVector,
    pub matrix: DissimilarityMatrix,
    /// `None` for a single-object dataset.
    pub tree: Option<SpanningTree>,
    pub forest: Option<Forest>,
    pub components: Vec<Vec<usize>>,
    pub centroids: Centroids,
}

/// Coordinate-wise mean of every part, skipping missing values.
pub fn centroids_from_components(d: &Dataset, parts: &[Vec<usize>]) -> Result<Centroids> {
    let n = d.n();
    let m = d.m();
    let mut seen = vec![false; n];
    for (p, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::EmptyPart(p));
        }
        for &i in part {
            if i >= n {
                return Err(Error::IndexOutOfRange {
                    what: "objects",
                    index: i,
                    size: n,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!(
                    "object {} appears twice",
                    i + 1
                )));
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("object {} not covered", i + 1)));
    }

    let mut points = Vec::with_capacity(parts.len() * m);
    for (p, part) in parts.iter().enumerate() {
        for f in 0..m {
            let (sum, count) = part
                .iter()
                .filter_map(|&i| d.value(i, f))
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            if count == 0 {
                return Err(Error::UnobservedCoordinate { part: p, feature: f });
            }
            points.push(sum / count as f64);
        }
    }
    Centroids::new(parts.len(), m, points, SeedMethod::Tree)
}

pub fn tree_seed_detailed(d: &Dataset, k: usize, cfg: &SeedConfig) -> Result<TreeSeeding> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let ranges = d.feature_ranges(&cfg.range_overrides)?;
    let matrix = combined_matrix(d, &ranges, &cfg.dissimilarity_options())?;
    let (tree, forest, components) = if n == 1 {
        (None, None, vec![vec![0]])
    } else {
        let tree = build_mst(&matrix)?;
        let forest = prune_heaviest(&tree, k)?;
        let components = forest.components().to_vec();
        (Some(tree), Some(forest), components)
    };
    let centroids = centroids_from_components(d, &components)?;
    Ok(TreeSeeding {
        ranges,
        matrix,
        tree,
        forest,
        components,
        centroids,
    })
}

/// Means of the `k` sub-trees left after cutting the `k - 1` heaviest edges
/// of the minimum dissimilarity tree.
pub fn tree_seed(d: &Dataset, k: usize, cfg: &SeedConfig) -> Result<Centroids> {
    tree_seed_detailed(d, k, cfg).map(|s| s.centroids)
}

/// `k` distinct objects drawn uniformly without replacement.
///
/// The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`, so
/// a given seed selects the same objects on every platform.
pub fn random_centroids(d: &Dataset, k: usize, seed: u64) -> Result<Centroids> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if d.has_missing() {
        return Err(Error::MissingValues);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, n, k);
    let mut points = Vec::with_capacity(k * d.m());
    for i in picks.iter() {
        points.extend_from_slice(d.row(i));
    }
    Centroids::new(k, d.m(), points, SeedMethod::Random { seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> Dataset {
        Dataset::from_rows(vec![
            vec![2.0, 5.0, 6.0],
            vec![7.0, 1.0, 2.0],
            vec![3.0, 6.0, 4.0],
            vec![1.0, 8.0, 0.0],
            vec![1.0, 9.0, 2.0],
            vec![5.0, 2.0, 6.0],
            vec![8.0, 2.0, 3.0],
            vec![4.0, 6.0, 1.0],
            vec![6.0, 4.0, 5.0],
            vec![9.0, 3.0, 7.0],
        ])
        .unwrap()
    }

    fn override_cfg() -> SeedConfig {
        SeedConfig {
            range_overrides: BTreeMap::from([(2, 8.0)]),
            ..SeedConfig::new()
        }
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-3)
    }

    fn everything_but(d: &Dataset, part: &[usize]) -> Vec<usize> {
        (0..d.n()).filter(|i| !part.contains(i)).collect()
    }

    #[test]
    fn component_means() {
        let d = table1();
        let c = centroids_from_components(&d, &[vec![1, 6], everything_but(&d, &[1, 6])]).unwrap();
        assert_eq!(c.point(0), &[7.5, 1.5, 2.5]);

        let c = centroids_from_components(&d, &[vec![3], everything_but(&d, &[3])]).unwrap();
        assert_eq!(c.point(0), &[1.0, 8.0, 0.0]);

        let c = centroids_from_components(&d, &[(0..10).collect()]).unwrap();
        assert!(close(c.point(0), &[4.6, 4.6, 3.6]));
    }

    #[test]
    fn component_errors() {
        let d = table1();
        assert!(matches!(
            centroids_from_components(&d, &[(0..10).collect(), vec![]]),
            Err(Error::EmptyPart(1))
        ));
        assert!(matches!(
            centroids_from_components(&d, &[(0..9).collect()]),
            Err(Error::InvalidPartition(_))
        ));
        let sparse = Dataset::from_optional_rows(vec![
            vec![Some(1.0), None],
            vec![Some(2.0), Some(3.0)],
        ])
        .unwrap();
        assert!(matches!(
            centroids_from_components(&sparse, &[vec![0], vec![1]]),
            Err(Error::UnobservedCoordinate { part: 0, feature: 1 })
        ));
        let c = centroids_from_components(&sparse, &[vec![0, 1]]).unwrap();
        assert_eq!(c.point(0), &[1.5, 3.0]);
    }

    #[test]
    fn worked_example_components() {
        let s = tree_seed_detailed(&table1(), 4, &override_cfg()).unwrap();
        assert_eq!(
            s.components,
            vec![vec![0, 2, 7], vec![1, 6], vec![3, 4], vec![5, 8, 9]]
        );
        assert!(close(s.centroids.point(0), &[3.0, 5.667, 3.667]));
        assert_eq!(s.centroids.point(1), &[7.5, 1.5, 2.5]);
        assert_eq!(s.centroids.point(2), &[1.0, 8.5, 1.0]);
        assert!(close(s.centroids.point(3), &[6.667, 3.0, 6.0]));
        assert_eq!(s.centroids.method(), SeedMethod::Tree);
    }

    #[test]
    fn tree_seed_extremes() {
        let d = table1();
        let one = tree_seed(&d, 1, &SeedConfig::new()).unwrap();
        assert!(close(one.point(0), &[4.6, 4.6, 3.6]));
        let all = tree_seed(&d, 10, &SeedConfig::new()).unwrap();
        let mut rows = all.to_rows();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut objects: Vec<Vec<f64>> = (0..10).map(|i| d.row(i).to_vec()).collect();
        objects.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, objects);
        assert!(matches!(tree_seed(&d, 11, &SeedConfig::new()), Err(Error::InvalidK { .. })));
        assert!(matches!(tree_seed(&d, 0, &SeedConfig::new()), Err(Error::InvalidK { .. })));

        let single = Dataset::from_rows(vec![vec![3.0, 4.0]]).unwrap();
        assert_eq!(tree_seed(&single, 1, &SeedConfig::new()).unwrap().point(0), &[3.0, 4.0]);
    }

    #[test]
    fn random_is_deterministic_and_distinct() {
        let d = table1();
        let a = random_centroids(&d, 4, 7).unwrap();
        let b = random_centroids(&d, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method(), SeedMethod::Random { seed: 7 });

        let all = random_centroids(&d, 10, 99).unwrap();
        let mut rows = all.to_rows();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.dedup();
        assert_eq!(rows.len(), 10);

        let one = random_centroids(&d, 1, 3).unwrap();
        assert!((0..10).any(|i| d.row(i) == one.point(0)));

        assert!(matches!(random_centroids(&d, 11, 0), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn centroid_csv() {
        let c = Centroids::from_rows(&[vec![1.0, 2.5]], SeedMethod::External).unwrap();
        assert_eq!(c.to_csv_string(), "1.000000,2.500000\n");
    }
}
