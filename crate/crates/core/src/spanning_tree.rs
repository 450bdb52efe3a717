//! Minimum spanning tree over the complete dissimilarity graph and its
//! pruning into sub-trees.
//!
//! Ties are broken by the canonical endpoint pair `(u, v)`, `u < v`:
//! construction scans edges in ascending `(weight, u, v)` order, pruning
//! removes edges in descending weight then ascending `(u, v)` order. Weights
//! are compared exactly.

use std::cmp::Ordering;

use serde::Serialize;

use crate::dissimilarity::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    fn ascending(a: &Edge, b: &Edge) -> Ordering {
        a.weight
            .total_cmp(&b.weight)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    }

    fn heaviest_first(a: &Edge, b: &Edge) -> Ordering {
        b.weight
            .total_cmp(&a.weight)
            .then(a.u.cmp(&b.u))
            .then(a.v.cmp(&b.v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<Edge>,
}

impl SpanningTree {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Tree edges in acceptance order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

/// What is left of a tree after pruning.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forest {
    n: usize,
    edges: Vec<Edge>,
    pruned: Vec<Edge>,
    components: Vec<Vec<usize>>,
}

impl Forest {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Removed edges in removal order.
    pub fn pruned(&self) -> &[Edge] {
        &self.pruned
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }
}

/// Kruskal's algorithm on the complete graph of `dm`.
pub fn build_mst(dm: &DissimilarityMatrix) -> Result<SpanningTree> {
    let n = dm.n();
    if n < 2 {
        return Err(Error::TooFewNodes(n));
    }
    let mut candidates = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            candidates.push(Edge {
                u,
                v,
                weight: dm.get(u, v),
            });
        }
    }
    candidates.sort_unstable_by(Edge::ascending);

    let mut uf = UnionFind::new(n);
    let mut edges = Vec::with_capacity(n - 1);
    for e in candidates {
        if uf.union(e.u, e.v) {
            edges.push(e);
            if edges.len() == n - 1 {
                break;
            }
        }
    }
    if edges.len() != n - 1 {
        return Err(Error::Invariant(format!(
            "spanning tree has {} edges, expected {}",
            edges.len(),
            n - 1
        )));
    }
    Ok(SpanningTree { n, edges })
}

/// Removes the `k - 1` heaviest edges, leaving exactly `k` components.
pub fn prune_heaviest(tree: &SpanningTree, k: usize) -> Result<Forest> {
    let n = tree.n;
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut order = tree.edges.clone();
    order.sort_by(Edge::heaviest_first);
    let pruned: Vec<Edge> = order.drain(..k - 1).collect();
    let edges: Vec<Edge> = tree
        .edges
        .iter()
        .filter(|e| !pruned.iter().any(|p| p.u == e.u && p.v == e.v))
        .copied()
        .collect();

    let mut uf = UnionFind::new(n);
    for e in &edges {
        uf.union(e.u, e.v);
    }
    if uf.sets() != k {
        return Err(Error::Invariant(format!(
            "pruning left {} components, expected {k}",
            uf.sets()
        )));
    }
    Ok(Forest {
        n,
        edges,
        pruned,
        components: uf.groups(),
    })
}

/// Components of a forest: each sorted ascending, ordered by smallest member.
pub fn components(forest: &Forest) -> Vec<Vec<usize>> {
    forest.components.clone()
}
