//! Exact k-nearest-neighbor search with a small kd-tree.
//!
//! Neighbours are ordered by `(squared distance, index)`, the same total order
//! the brute-force scan uses, so both return identical lists including ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cloud::{sq_dist, Point3};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub sq_dist: f64,
    pub index: usize,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.sq_dist
            .total_cmp(&other.sq_dist)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug)]
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

#[derive(Debug)]
pub struct KdTree<'a> {
    points: &'a [Point3],
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Point3]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let points = self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis])
        });
        let value = points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for a in 0..3 {
                lo[a] = lo[a].min(self.points[i][a]);
                hi[a] = hi[a].max(self.points[i][a]);
            }
        }
        (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0)
    }

    /// The `k` nearest points to `query`, ascending, optionally skipping one index.
    pub fn knn(&self, query: &Point3, k: usize, exclude: Option<usize>) -> Vec<Neighbor> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut heap);
        let mut out = heap.into_vec();
        out.sort_unstable();
        out
    }

    pub fn nearest(&self, query: &Point3) -> Option<Neighbor> {
        self.knn(query, 1, None).into_iter().next()
    }

    fn search(
        &self,
        node: usize,
        query: &Point3,
        k: usize,
        exclude: Option<usize>,
        heap: &mut BinaryHeap<Neighbor>,
    ) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let cand = Neighbor {
                        sq_dist: sq_dist(query, &self.points[i]),
                        index: i,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(cand);
                    }
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
                self.search(near, query, k, exclude, heap);
                // ties at the bound still matter for the index tie-break
                if heap.len() < k || diff * diff <= heap.peek().unwrap().sq_dist {
                    self.search(far, query, k, exclude, heap);
                }
            }
        }
    }
}

/// Reference scan used to check the tree.
pub fn brute_force_knn(
    points: &[Point3],
    query: &Point3,
    k: usize,
    exclude: Option<usize>,
) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != exclude)
        .map(|(i, p)| Neighbor {
            sq_dist: sq_dist(query, p),
            index: i,
        })
        .collect();
    all.sort_unstable();
    all.truncate(k);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coords() -> impl Strategy<Value = Vec<Point3>> {
        // a coarse lattice of values so that distance ties are common
        prop::collection::vec(
            prop::array::uniform3((-4i32..=4).prop_map(|v| v as f64 * 0.5)),
            1..120,
        )
    }

    proptest! {
        #[test]
        fn knn_matches_brute_force(points in coords(), k in 1usize..12, q in 0usize..1000) {
            let tree = KdTree::new(&points);
            let qi = q % points.len();
            let query = points[qi];
            prop_assert_eq!(tree.knn(&query, k, Some(qi)), brute_force_knn(&points, &query, k, Some(qi)));
            let off = [query[0] + 0.25, query[1] - 0.1, query[2]];
            prop_assert_eq!(tree.knn(&off, k, None), brute_force_knn(&points, &off, k, None));
        }
    }

    #[test]
    fn empty_and_single() {
        let empty: Vec<Point3> = vec![];
        assert!(KdTree::new(&empty).nearest(&[0.0; 3]).is_none());
        let one = vec![[1.0, 2.0, 3.0]];
        let n = KdTree::new(&one).nearest(&[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(n.index, 0);
        assert_eq!(n.sq_dist, 1.0);
    }
}
