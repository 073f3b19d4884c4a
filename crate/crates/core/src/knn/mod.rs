//! k-th nearest-neighbor distances within one sample or from one sample to
//! another, with an exhaustive oracle and a k-d tree path that agree bit for
//! bit.
//!
//! Zero distances (duplicate points) never count as neighbors: the k-th
//! neighbor is the k-th closest point at strictly positive distance. A point
//! with fewer than `k` such neighbors gets no distance and is flagged.

mod kdtree;
mod metric;

pub use kdtree::KdTree;
pub use metric::{Mahalanobis, Metric, MetricKind, MAX_CONDITION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::SampleMatrix;
use kdtree::Candidates;
use metric::squared_distance;

/// Sample size above which [`SearchMethod::Auto`] uses the k-d tree.
pub const AUTO_INDEX_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    BruteForce,
    KdTree,
    #[default]
    Auto,
}

impl SearchMethod {
    fn use_tree(self, n: usize) -> bool {
        match self {
            SearchMethod::BruteForce => false,
            SearchMethod::KdTree => true,
            SearchMethod::Auto => n > AUTO_INDEX_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborMode {
    WithinSample,
    CrossSample,
}

/// Per-point k-th neighbor distances.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborDistances {
    /// `None` for points with fewer than `k` neighbors at nonzero distance.
    pub rho: Vec<Option<f64>>,
    pub k: usize,
    pub mode: NeighborMode,
    /// Number of zero-distance neighbors discarded for each point.
    pub zero_drop_count: Vec<usize>,
}

impl NeighborDistances {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `(index, distance)` of every point that has a k-th neighbor.
    pub fn retained(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rho
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.map(|r| (i, r)))
    }

    pub fn flagged_count(&self) -> usize {
        self.rho.iter().filter(|r| r.is_none()).count()
    }

    pub fn total_zero_drops(&self) -> usize {
        self.zero_drop_count.iter().sum()
    }
}

struct RawNeighbors {
    sorted: Vec<f64>,
    zeros: usize,
}

fn collect(ks: &[usize], mode: NeighborMode, raw: Vec<RawNeighbors>) -> Vec<NeighborDistances> {
    ks.iter()
        .map(|&k| NeighborDistances {
            rho: raw
                .iter()
                .map(|r| r.sorted.get(k - 1).map(|d2| d2.sqrt()))
                .collect(),
            k,
            mode,
            zero_drop_count: raw.iter().map(|r| r.zeros).collect(),
        })
        .collect()
}

fn validate_ks(ks: &[usize], available: usize) -> Result<usize> {
    let kmax = ks
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Domain("at least one neighbor order is required".into()))?;
    if let Some(&k) = ks.iter().find(|&&k| k == 0) {
        return Err(Error::InvalidK { k, available });
    }
    if kmax > available {
        return Err(Error::InvalidK { k: kmax, available });
    }
    Ok(kmax)
}

fn scan_exhaustive(
    points: &SampleMatrix,
    query: &[f64],
    exclude: Option<usize>,
    kmax: usize,
) -> RawNeighbors {
    let mut all: Vec<f64> = points
        .rows()
        .enumerate()
        .filter(|(j, _)| Some(*j) != exclude)
        .map(|(_, p)| squared_distance(query, p))
        .collect();
    let zeros = all.iter().filter(|&&d| d == 0.0).count();
    all.retain(|&d| d != 0.0);
    all.sort_by(f64::total_cmp);
    all.truncate(kmax);
    RawNeighbors { sorted: all, zeros }
}

fn within_embedded(
    points: &SampleMatrix,
    ks: &[usize],
    method: SearchMethod,
) -> Result<Vec<NeighborDistances>> {
    let n = points.n();
    if n < 2 {
        return Err(Error::InvalidK {
            k: ks.first().copied().unwrap_or(1),
            available: n.saturating_sub(1),
        });
    }
    let kmax = validate_ks(ks, n - 1)?;
    let raw: Vec<RawNeighbors> = if method.use_tree(n) {
        let tree = KdTree::build(points.as_slice(), points.m());
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut cand = Candidates::new(kmax);
                tree.search(points.row(i), Some(i), &mut cand);
                RawNeighbors {
                    sorted: cand.sorted().to_vec(),
                    zeros: cand.zeros(),
                }
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| scan_exhaustive(points, points.row(i), Some(i), kmax))
            .collect()
    };
    Ok(collect(ks, NeighborMode::WithinSample, raw))
}

fn cross_embedded(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    ks: &[usize],
    method: SearchMethod,
) -> Result<Vec<NeighborDistances>> {
    if queries.m() != references.m() {
        return Err(Error::DimensionMismatch {
            expected: references.m(),
            found: queries.m(),
        });
    }
    let kmax = validate_ks(ks, references.n())?;
    let raw: Vec<RawNeighbors> = if method.use_tree(references.n()) {
        let tree = KdTree::build(references.as_slice(), references.m());
        (0..queries.n())
            .into_par_iter()
            .map(|i| {
                let mut cand = Candidates::new(kmax);
                tree.search(queries.row(i), None, &mut cand);
                RawNeighbors {
                    sorted: cand.sorted().to_vec(),
                    zeros: cand.zeros(),
                }
            })
            .collect()
    } else {
        (0..queries.n())
            .into_par_iter()
            .map(|i| scan_exhaustive(references, queries.row(i), None, kmax))
            .collect()
    };
    Ok(collect(ks, NeighborMode::CrossSample, raw))
}

/// k-th neighbor distances for several orders at once from a single search.
pub fn within_sample_knn_multi(
    sample: &SampleMatrix,
    ks: &[usize],
    metric: &Metric,
    method: SearchMethod,
) -> Result<Vec<NeighborDistances>> {
    within_embedded(&metric.embed(sample)?, ks, method)
}

/// Cross-sample counterpart of [`within_sample_knn_multi`].
pub fn cross_sample_knn_multi(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    ks: &[usize],
    metric: &Metric,
    method: SearchMethod,
) -> Result<Vec<NeighborDistances>> {
    if queries.m() != references.m() {
        return Err(Error::DimensionMismatch {
            expected: references.m(),
            found: queries.m(),
        });
    }
    cross_embedded(
        &metric.embed(queries)?,
        &metric.embed(references)?,
        ks,
        method,
    )
}

fn single(mut v: Vec<NeighborDistances>) -> NeighborDistances {
    v.pop().expect("one order requested")
}

/// Distance from every point to its k-th nearest other point, via the k-d tree.
pub fn within_sample_knn(
    sample: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<NeighborDistances> {
    within_sample_knn_multi(sample, &[k], metric, SearchMethod::KdTree).map(single)
}

/// Exhaustive `O(N²)` version of [`within_sample_knn`], used as a test oracle.
pub fn brute_force_knn(
    sample: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<NeighborDistances> {
    within_sample_knn_multi(sample, &[k], metric, SearchMethod::BruteForce).map(single)
}

/// Distance from every query to its k-th nearest reference point, via the k-d tree.
pub fn cross_sample_knn(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<NeighborDistances> {
    cross_sample_knn_multi(queries, references, &[k], metric, SearchMethod::KdTree).map(single)
}

/// Exhaustive version of [`cross_sample_knn`].
pub fn brute_force_cross_knn(
    queries: &SampleMatrix,
    references: &SampleMatrix,
    k: usize,
    metric: &Metric,
) -> Result<NeighborDistances> {
    cross_sample_knn_multi(queries, references, &[k], metric, SearchMethod::BruteForce).map(single)
}
