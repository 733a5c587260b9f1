//! Symmetric Euclidean k-NN proximity graph.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cloud::{dist, PointCloud};
use crate::error::{Error, Result};
use crate::spatial::KdTree;

pub const DEFAULT_K_GRAPH: usize = 8;

/// Undirected weighted graph over cloud indices.
///
/// Neighbor lists are sorted by neighbor index, weights are strictly
/// positive and finite, there are no self loops, and `(i, j, w)` is present
/// iff `(j, i, w)` is.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl ProximityGraph {
    /// Builds a graph from undirected edges `(i, j, w)`; every invariant is checked.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: n,
                });
            }
            if i == j {
                return Err(Error::invalid(format!("self loop at vertex {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("edge {i}-{j} has weight {w}")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for (v, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(u, _)| u);
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::invalid(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(ProximityGraph {
            adjacency,
            edge_count: edges.len(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    /// Undirected edges with `i < j`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| {
                list.iter()
                    .filter(move |&&(j, _)| j > i)
                    .map(move |&(j, w)| (i, j, w))
            })
            .collect()
    }

    /// `{n, edges: [[i, j, w], ...]}` with `i < j`, sorted.
    pub fn to_json(&self) -> Value {
        let edges: Vec<Value> = self
            .edges()
            .into_iter()
            .map(|(i, j, w)| json!([i, j, w]))
            .collect();
        json!({ "n": self.n(), "edges": edges })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Doc {
            n: usize,
            edges: Vec<(usize, usize, f64)>,
        }
        let doc: Doc = serde_json::from_value(value.clone())
            .map_err(|e| Error::invalid(format!("graph json: {e}")))?;
        Self::from_edges(doc.n, &doc.edges)
    }

    /// Number of connected components (breadth-first sweep).
    pub fn component_count(&self) -> usize {
        self.components().into_iter().max().map_or(0, |c| c + 1)
    }

    /// Component label per vertex, labelled in order of lowest member.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.n() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(u, _) in self.neighbors(v) {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

/// Connects every point to its `k_graph` nearest Euclidean neighbors and
/// symmetrizes by union. Ties at the k-th distance go to the lowest index.
pub fn build_knn_graph(cloud: &PointCloud, k_graph: usize) -> Result<ProximityGraph> {
    let n = cloud.len();
    if k_graph == 0 || k_graph >= n {
        return Err(Error::invalid(format!(
            "k_graph must satisfy 1 <= k_graph < N = {n}, got {k_graph}"
        )));
    }
    let points = cloud.positions();
    let tree = KdTree::new(points);
    let directed: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            tree.knn(&points[i], k_graph, Some(i))
                .into_iter()
                .map(|nb| nb.index)
                .collect()
        })
        .collect();

    // the nearest neighbour of a duplicated point is its twin at distance 0
    for (i, nbrs) in directed.iter().enumerate() {
        let j = nbrs[0];
        if dist(&points[i], &points[j]) == 0.0 {
            return Err(Error::DuplicatePoint(i.min(j), i.max(j)));
        }
    }

    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, nbrs) in directed.iter().enumerate() {
        for &j in nbrs {
            let (a, b) = (i.min(j), i.max(j));
            let w = dist(&points[a], &points[b]);
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
    }
    let mut edge_count = 0;
    for (v, list) in adjacency.iter_mut().enumerate() {
        list.sort_by_key(|&(u, _)| u);
        list.dedup_by_key(|&mut (u, _)| u);
        edge_count += list.iter().filter(|&&(u, _)| u > v).count();
    }
    Ok(ProximityGraph {
        adjacency,
        edge_count,
    })
}
