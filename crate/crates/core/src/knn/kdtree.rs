//! Exact k-d tree over a flat row-major point buffer.
//!
//! The tree returns the same squared distances as an exhaustive scan: a
//! subtree is skipped only when the squared gap to its splitting plane is
//! strictly larger than the current k-th best squared distance. Rounding is
//! monotone, so the gap never exceeds the computed distance of any point
//! behind the plane.

use super::metric::squared_distance;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Bounded sorted list of the smallest nonzero squared distances seen, plus a
/// count of exact zeros (duplicates of the query).
#[derive(Debug, Clone)]
pub(crate) struct Candidates {
    best: Vec<f64>,
    cap: usize,
    zeros: usize,
}

impl Candidates {
    pub(crate) fn new(cap: usize) -> Self {
        Self {
            best: Vec::with_capacity(cap + 1),
            cap,
            zeros: 0,
        }
    }

    #[inline]
    pub(crate) fn worst(&self) -> f64 {
        if self.best.len() < self.cap {
            f64::INFINITY
        } else {
            self.best[self.cap - 1]
        }
    }

    #[inline]
    pub(crate) fn offer(&mut self, d2: f64) {
        if d2 == 0.0 {
            self.zeros += 1;
            return;
        }
        if d2 >= self.worst() {
            return;
        }
        let pos = self.best.partition_point(|&b| b <= d2);
        self.best.insert(pos, d2);
        self.best.truncate(self.cap);
    }

    /// Ascending nonzero squared distances (at most `cap`).
    pub(crate) fn sorted(&self) -> &[f64] {
        &self.best
    }

    pub(crate) fn zeros(&self) -> usize {
        self.zeros
    }
}

#[derive(Debug)]
pub struct KdTree<'a> {
    coords: &'a [f64],
    m: usize,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    /// Builds the tree over `coords` (row-major, `m` columns).
    pub fn build(coords: &'a [f64], m: usize) -> Self {
        assert!(m > 0 && coords.len().is_multiple_of(m));
        let n = coords.len() / m;
        let mut tree = Self {
            coords,
            m,
            order: (0..n).collect(),
            nodes: Vec::with_capacity(2 * n / LEAF_SIZE + 1),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    #[inline]
    fn point(&self, idx: usize) -> &[f64] {
        &self.coords[idx * self.m..(idx + 1) * self.m]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let (coords, m) = (self.coords, self.m);
        let mid = (end - start) / 2;
        let slice = &mut self.order[start..end];
        slice.select_nth_unstable_by(mid, |&a, &b| {
            coords[a * m + axis].total_cmp(&coords[b * m + axis])
        });
        let value = coords[slice[mid] * m + axis];
        // placeholder, patched once children exist
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = vec![f64::INFINITY; self.m];
        let mut hi = vec![f64::NEG_INFINITY; self.m];
        for &idx in &self.order[start..end] {
            for (a, &v) in self.point(idx).iter().enumerate() {
                lo[a] = lo[a].min(v);
                hi[a] = hi[a].max(v);
            }
        }
        (0..self.m)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0)
    }

    /// Feeds every point that can still improve `cand` into it. The point
    /// with index `exclude` (the query itself, for within-sample searches)
    /// is never offered.
    pub(crate) fn search(&self, query: &[f64], exclude: Option<usize>, cand: &mut Candidates) {
        if !self.nodes.is_empty() {
            self.search_node(0, query, exclude, cand);
        }
    }

    fn search_node(&self, id: usize, query: &[f64], exclude: Option<usize>, cand: &mut Candidates) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &idx in &self.order[start..end] {
                    if Some(idx) == exclude {
                        continue;
                    }
                    cand.offer(squared_distance(query, self.point(idx)));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = query[axis] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search_node(near, query, exclude, cand);
                if diff * diff <= cand.worst() {
                    self.search_node(far, query, exclude, cand);
                }
            }
        }
    }
}
