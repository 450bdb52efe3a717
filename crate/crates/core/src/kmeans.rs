//! Lloyd's algorithm on raw feature values.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seeding::{Centroids, SeedMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmptyClusterPolicy {
    /// Move the object farthest from its own centroid into the empty cluster.
    #[default]
    ReassignFarthest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LloydConfig {
    pub max_iterations: usize,
    /// When positive, also stop once no centroid moves farther than this.
    pub centroid_tolerance: f64,
    pub empty_cluster_policy: EmptyClusterPolicy,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            centroid_tolerance: 0.0,
            empty_cluster_policy: EmptyClusterPolicy::ReassignFarthest,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringResult {
    /// Zero-based cluster index per object.
    pub assignments: Vec<usize>,
    pub centroids: Centroids,
    /// Criterion value after every update step.
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusteringResult {
    pub fn final_sse(&self) -> f64 {
        self.sse_trace.last().copied().unwrap_or(f64::NAN)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_inputs(d: &Dataset, m: usize) -> Result<()> {
    if d.m() != m {
        return Err(Error::DimensionMismatch {
            expected: d.m(),
            found: m,
        });
    }
    if d.has_missing() {
        return Err(Error::MissingValues);
    }
    Ok(())
}

fn nearest(row: &[f64], c: &Centroids) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for j in 0..c.k() {
        let dist = squared_distance(row, c.point(j));
        if dist < best_dist {
            best = j;
            best_dist = dist;
        }
    }
    best
}

/// Nearest centroid per object; ties go to the lowest cluster index.
pub fn assign(d: &Dataset, c: &Centroids) -> Result<Vec<usize>> {
    check_inputs(d, c.m())?;
    Ok((0..d.n()).map(|i| nearest(d.row(i), c)).collect())
}

fn cluster_means(d: &Dataset, assignments: &[usize], k: usize) -> (Vec<f64>, Vec<usize>) {
    let m = d.m();
    let mut sums = vec![0.0; k * m];
    let mut counts = vec![0usize; k];
    for (i, &j) in assignments.iter().enumerate() {
        counts[j] += 1;
        for (s, v) in sums[j * m..(j + 1) * m].iter_mut().zip(d.row(i)) {
            *s += v;
        }
    }
    for (j, &count) in counts.iter().enumerate() {
        if count > 0 {
            for s in &mut sums[j * m..(j + 1) * m] {
                *s /= count as f64;
            }
        }
    }
    (sums, counts)
}

/// Recomputes every centroid as the mean of its members.
///
/// Empty clusters are filled first: the object farthest from its current
/// cluster mean (among clusters with more than one member, lowest index on
/// ties) is moved into the empty cluster, and `assignments` is updated in
/// place to reflect the move.
pub fn update_centroids(d: &Dataset, assignments: &mut [usize], k: usize) -> Result<Centroids> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if assignments.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: assignments.len(),
        });
    }
    if let Some(&bad) = assignments.iter().find(|&&j| j >= k) {
        return Err(Error::IndexOutOfRange {
            what: "clusters",
            index: bad,
            size: k,
        });
    }
    if d.has_missing() {
        return Err(Error::MissingValues);
    }
    let m = d.m();
    let (mut means, mut counts) = cluster_means(d, assignments, k);
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let mut farthest = None;
        let mut far_dist = f64::NEG_INFINITY;
        for (i, &j) in assignments.iter().enumerate() {
            if counts[j] < 2 {
                continue;
            }
            let dist = squared_distance(d.row(i), &means[j * m..(j + 1) * m]);
            if dist > far_dist {
                far_dist = dist;
                farthest = Some(i);
            }
        }
        let i = farthest
            .ok_or_else(|| Error::Invariant("no object available for an empty cluster".into()))?;
        assignments[i] = empty;
        (means, counts) = cluster_means(d, assignments, k);
    }
    Centroids::new(k, m, means, SeedMethod::External)
}

/// Sum over objects of the squared distance to the assigned centroid.
pub fn sse(d: &Dataset, assignments: &[usize], c: &Centroids) -> f64 {
    assignments
        .iter()
        .enumerate()
        .map(|(i, &j)| squared_distance(d.row(i), c.point(j)))
        .sum()
}

pub fn lloyd(d: &Dataset, init: &Centroids, cfg: &LloydConfig) -> Result<ClusteringResult> {
    check_inputs(d, init.m())?;
    let k = init.k();
    if k > d.n() {
        return Err(Error::InvalidK { k, n: d.n() });
    }
    if cfg.max_iterations == 0 {
        return Err(Error::Config("max_iterations must be >= 1".into()));
    }
    let method = init.method();
    let mut centroids = init.clone();
    let mut previous: Option<Vec<usize>> = None;
    let mut sse_trace = Vec::new();
    let mut converged = false;

    loop {
        let mut assignments = assign(d, &centroids)?;
        if previous.as_ref() == Some(&assignments) {
            converged = true;
            break;
        }
        if sse_trace.len() == cfg.max_iterations {
            // Report the state the last update produced, not this extra pass.
            break;
        }
        let updated = update_centroids(d, &mut assignments, k)?;
        let movement = (0..k)
            .map(|j| squared_distance(centroids.point(j), updated.point(j)).sqrt())
            .fold(0.0, f64::max);
        sse_trace.push(sse(d, &assignments, &updated));
        centroids = updated;
        previous = Some(assignments);
        if cfg.centroid_tolerance > 0.0 && movement <= cfg.centroid_tolerance {
            converged = true;
            break;
        }
    }

    let assignments = match previous {
        Some(a) => a,
        None => assign(d, &centroids)?,
    };
    Ok(ClusteringResult {
        assignments,
        centroids: centroids.with_method(method),
        iterations: sse_trace.len(),
        sse_trace,
        converged,
    })
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

    fn seeded_centroids() -> Centroids {
        Centroids::from_rows(
            &[
                vec![3.0, 17.0 / 3.0, 11.0 / 3.0],
                vec![7.5, 1.5, 2.5],
                vec![1.0, 8.5, 1.0],
                vec![20.0 / 3.0, 3.0, 6.0],
            ],
            SeedMethod::Tree,
        )
        .unwrap()
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean(&[1.5, 2.0], &[1.5, 2.0]).unwrap(), 0.0);
        let d = table1();
        assert!((euclidean(d.row(0), d.row(1)).unwrap() - 57f64.sqrt()).abs() < 1e-12);
        assert!((euclidean(d.row(0), d.row(1)).unwrap() - 7.5498).abs() < 1e-4);
        assert!(matches!(euclidean(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn assign_examples() {
        let d = table1();
        let a = assign(&d, &seeded_centroids()).unwrap();
        assert_eq!(a[8], 3);
        assert_eq!(a, vec![0, 1, 0, 2, 2, 3, 1, 0, 3, 3]);

        let one = Centroids::from_rows(&[vec![0.0, 0.0, 0.0]], SeedMethod::External).unwrap();
        assert!(assign(&d, &one).unwrap().iter().all(|&j| j == 0));

        let line = Dataset::from_rows(vec![vec![1.0]]).unwrap();
        let two = Centroids::from_rows(&[vec![0.0], vec![2.0]], SeedMethod::External).unwrap();
        assert_eq!(assign(&line, &two).unwrap(), vec![0]);
    }

    #[test]
    fn update_examples() {
        let d = table1();
        let mut a = vec![0, 1, 0, 0, 0, 0, 1, 0, 0, 0];
        let c = update_centroids(&d, &mut a, 2).unwrap();
        assert_eq!(c.point(1), &[7.5, 1.5, 2.5]);

        let mut own: Vec<usize> = (0..10).collect();
        let c = update_centroids(&d, &mut own, 10).unwrap();
        for i in 0..10 {
            assert_eq!(c.point(i), d.row(i));
        }
    }

    #[test]
    fn empty_cluster_takes_farthest_object() {
        let d = Dataset::from_rows(vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0]]).unwrap();
        let mut a = vec![0, 0, 0, 0];
        let c = update_centroids(&d, &mut a, 2).unwrap();
        assert_eq!(a, vec![0, 0, 0, 1]);
        assert_eq!(c.point(0), &[1.0]);
        assert_eq!(c.point(1), &[10.0]);
    }

    #[test]
    fn sse_examples() {
        let d = Dataset::from_rows(vec![vec![0.0], vec![2.0]]).unwrap();
        let c = Centroids::from_rows(&[vec![1.0]], SeedMethod::External).unwrap();
        assert_eq!(sse(&d, &[0, 0], &c), 2.0);
        let own = Centroids::from_rows(&[vec![0.0], vec![2.0]], SeedMethod::External).unwrap();
        assert_eq!(sse(&d, &[0, 1], &own), 0.0);
    }

    #[test]
    fn worked_example_is_a_fixed_point() {
        let d = table1();
        let r = lloyd(&d, &seeded_centroids(), &LloydConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.assignments, vec![0, 1, 0, 2, 2, 3, 1, 0, 3, 3]);
        assert_eq!(r.centroids.method(), SeedMethod::Tree);
    }

    #[test]
    fn single_cluster_converges_to_mean() {
        let d = table1();
        let init = Centroids::from_rows(&[d.row(0).to_vec()], SeedMethod::External).unwrap();
        let r = lloyd(&d, &init, &LloydConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        let mean = [4.6, 4.6, 3.6];
        assert!(r.centroids.point(0).iter().zip(mean).all(|(a, b)| (a - b).abs() < 1e-12));
        // Column variances (population) times n.
        let total: f64 = (0..3)
            .map(|f| (0..10).map(|i| (d.row(i)[f] - mean[f]).powi(2)).sum::<f64>())
            .sum();
        assert!((r.final_sse() - total).abs() < 1e-9);
    }

    #[test]
    fn iteration_cap_is_respected() {
        let d = Dataset::from_rows((0..40).map(|i| vec![(i * i % 17) as f64, (i % 7) as f64]).collect())
            .unwrap();
        let init = Centroids::from_rows(&[d.row(0).to_vec(), d.row(1).to_vec(), d.row(2).to_vec()], SeedMethod::External)
            .unwrap();
        let cfg = LloydConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let r = lloyd(&d, &init, &cfg).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.sse_trace.len(), 1);
        let zero = LloydConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(lloyd(&d, &init, &zero).is_err());
    }

    #[test]
    fn tolerance_stops_early() {
        let d = table1();
        let cfg = LloydConfig {
            centroid_tolerance: 1e6,
            ..Default::default()
        };
        let r = lloyd(&d, &seeded_centroids(), &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn missing_values_are_rejected() {
        let d = Dataset::from_optional_rows(vec![vec![Some(1.0)], vec![None]]).unwrap();
        let c = Centroids::from_rows(&[vec![0.0]], SeedMethod::External).unwrap();
        assert!(matches!(assign(&d, &c), Err(Error::MissingValues)));
    }
}
