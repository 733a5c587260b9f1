//! Anchor-based geodesic approximation.
//!
//! A sparse anchor set is chosen by farthest point sampling, and graph
//! geodesics between every anchor pair are precomputed. The distance between
//! arbitrary points `i` and `j` is then
//!
//! ```text
//! min over (u, v) of  leg(i, a_u) + D_A[u][v] + leg(j, a_v)
//! ```
//!
//! where `leg` is either the straight-line distance or the graph geodesic to
//! the anchor. With `candidates = M` the minimum ranges over all anchor
//! pairs; smaller values restrict each endpoint to its nearest anchors.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::dijkstra::shortest_paths;
use crate::cloud::{dist, Point3, PointCloud};
use crate::error::{check_index, Error, Result};
use crate::graph::ProximityGraph;
use crate::json;
use crate::matrix::Matrix;
use crate::sampling::fps;

pub const DEFAULT_ANCHORS: usize = 128;
pub const DEFAULT_CANDIDATES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegMetric {
    Euclidean,
    Graph,
}

impl LegMetric {
    pub fn name(self) -> &'static str {
        match self {
            LegMetric::Euclidean => "euclidean",
            LegMetric::Graph => "graph",
        }
    }
}

impl std::str::FromStr for LegMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(LegMetric::Euclidean),
            "graph" => Ok(LegMetric::Graph),
            other => Err(Error::invalid(format!("unknown leg metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    #[serde(default = "default_anchors", rename = "m")]
    pub m_anchors: usize,
    #[serde(default = "default_leg")]
    pub leg_metric: LegMetric,
    /// Nearest anchors considered per endpoint; `None` means `min(8, m)`.
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default)]
    pub fps_seed: usize,
    /// Run the per-anchor sweeps on the rayon pool.
    #[serde(default = "default_true", skip_serializing)]
    pub parallel: bool,
}

fn default_anchors() -> usize {
    DEFAULT_ANCHORS
}
fn default_leg() -> LegMetric {
    LegMetric::Euclidean
}
fn default_true() -> bool {
    true
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            m_anchors: DEFAULT_ANCHORS,
            leg_metric: LegMetric::Euclidean,
            s: None,
            fps_seed: 0,
            parallel: true,
        }
    }
}

impl EngineConfig {
    pub fn new(m_anchors: usize, leg_metric: LegMetric) -> Self {
        EngineConfig {
            m_anchors,
            leg_metric,
            ..Default::default()
        }
    }

    /// All anchor pairs are considered (`s = M`).
    pub fn exhaustive(mut self) -> Self {
        self.s = Some(self.m_anchors);
        self
    }

    pub fn with_candidates(mut self, s: usize) -> Self {
        self.s = Some(s);
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn with_fps_seed(mut self, seed: usize) -> Self {
        self.fps_seed = seed;
        self
    }

    fn candidate_count(&self) -> usize {
        self.s.unwrap_or(DEFAULT_CANDIDATES.min(self.m_anchors))
    }
}

/// FPS-chosen anchors and their pairwise graph geodesics.
///
/// The matrix is symmetric with zero diagonal; unreachable pairs hold
/// `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchor_indices: Vec<usize>,
    pub anchor_matrix: Matrix,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.anchor_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchor_indices.is_empty()
    }
}

/// Read-only query object for approximate geodesics. Immutable after
/// [`build_engine`]; share it freely across threads.
#[derive(Debug, Clone)]
pub struct GeodesicEngine {
    positions: Vec<Point3>,
    anchors: AnchorSet,
    /// N x M, `legs[i][u]` = leg length from point `i` to anchor `u`.
    legs: Matrix,
    leg_metric: LegMetric,
    s: usize,
    /// N x s anchor positions sorted by (leg, anchor position); empty when s = M.
    candidates: Vec<usize>,
}

pub fn build_engine(
    cloud: &PointCloud,
    graph: &ProximityGraph,
    config: &EngineConfig,
) -> Result<GeodesicEngine> {
    let n = cloud.len();
    if graph.n() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: graph.n(),
            context: "graph vertex count vs cloud size",
        });
    }
    let m = config.m_anchors;
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "m_anchors must satisfy 1 <= m <= {n}, got {m}"
        )));
    }
    let s = config.candidate_count();
    if s == 0 || s > m {
        return Err(Error::invalid(format!(
            "candidate count s must satisfy 1 <= s <= {m}, got {s}"
        )));
    }

    let anchor_indices = fps(cloud, m, config.fps_seed)?.indices;
    let sweep = |&a: &usize| shortest_paths(graph, a);
    let rows: Vec<Vec<f64>> = if config.parallel {
        anchor_indices.par_iter().map(sweep).collect()
    } else {
        anchor_indices.iter().map(sweep).collect()
    };

    let mut anchor_matrix = Matrix::zeros(m, m);
    let mut unreachable = 0usize;
    for u in 0..m {
        for v in (u + 1)..m {
            // both sweeps produce valid path lengths; keep the shorter so the
            // matrix is exactly symmetric
            let d = rows[u][anchor_indices[v]].min(rows[v][anchor_indices[u]]);
            if d.is_infinite() {
                unreachable += 1;
            }
            anchor_matrix.set(u, v, d);
            anchor_matrix.set(v, u, d);
        }
    }
    if unreachable > 0 {
        log::warn!("{unreachable} anchor pairs are mutually unreachable; the proximity graph is disconnected");
    }

    let positions = cloud.positions().to_vec();
    let mut legs = Matrix::zeros(n, m);
    for i in 0..n {
        let row = legs.row_mut(i);
        match config.leg_metric {
            LegMetric::Graph => {
                for (u, r) in rows.iter().enumerate() {
                    row[u] = r[i];
                }
            }
            LegMetric::Euclidean => {
                for (u, &a) in anchor_indices.iter().enumerate() {
                    row[u] = dist(&positions[i], &positions[a]);
                }
            }
        }
    }
    drop(rows);

    let candidates = if s == m {
        Vec::new()
    } else {
        let mut out = Vec::with_capacity(n * s);
        let mut order: Vec<usize> = Vec::with_capacity(m);
        for i in 0..n {
            let row = legs.row(i);
            order.clear();
            order.extend(0..m);
            order.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            out.extend_from_slice(&order[..s]);
        }
        out
    };

    Ok(GeodesicEngine {
        positions,
        anchors: AnchorSet {
            anchor_indices,
            anchor_matrix,
        },
        legs,
        leg_metric: config.leg_metric,
        s,
        candidates,
    })
}

impl GeodesicEngine {
    pub fn n_points(&self) -> usize {
        self.positions.len()
    }

    pub fn n_anchors(&self) -> usize {
        self.anchors.len()
    }

    pub fn anchors(&self) -> &AnchorSet {
        &self.anchors
    }

    pub fn leg_metric(&self) -> LegMetric {
        self.leg_metric
    }

    pub fn candidate_count(&self) -> usize {
        self.s
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    /// Leg lengths from point `i` to every anchor, in anchor order.
    pub fn legs(&self, i: usize) -> &[f64] {
        self.legs.row(i)
    }

    pub fn euclidean(&self, i: usize, j: usize) -> f64 {
        dist(&self.positions[i], &self.positions[j])
    }

    /// Anchor positions (into `anchor_indices`) considered for point `i`.
    pub fn candidates(&self, i: usize) -> Vec<usize> {
        if self.candidates.is_empty() {
            (0..self.n_anchors()).collect()
        } else {
            self.candidates[i * self.s..(i + 1) * self.s].to_vec()
        }
    }

    fn candidate_slice(&self, i: usize) -> Option<&[usize]> {
        if self.candidates.is_empty() {
            None
        } else {
            Some(&self.candidates[i * self.s..(i + 1) * self.s])
        }
    }

    /// `min over u in cand(a) of legs[a][u] + D_A[u][v]`.
    #[inline]
    fn reach(&self, a: usize, v: usize) -> f64 {
        let legs = self.legs.row(a);
        // D_A is symmetric, so row v holds column v
        let to_v = self.anchors.anchor_matrix.row(v);
        match self.candidate_slice(a) {
            None => legs
                .iter()
                .zip(to_v)
                .map(|(l, d)| l + d)
                .fold(f64::INFINITY, f64::min),
            Some(cands) => cands
                .iter()
                .map(|&u| legs[u] + to_v[u])
                .fold(f64::INFINITY, f64::min),
        }
    }

    fn reach_vector(&self, a: usize) -> Vec<f64> {
        (0..self.n_anchors()).map(|v| self.reach(a, v)).collect()
    }

    /// Final combination over the second endpoint's candidates.
    #[inline]
    fn close(&self, reach_a: impl Fn(usize) -> f64, b: usize) -> f64 {
        let legs = self.legs.row(b);
        match self.candidate_slice(b) {
            None => (0..legs.len())
                .map(|v| reach_a(v) + legs[v])
                .fold(f64::INFINITY, f64::min),
            Some(cands) => cands
                .iter()
                .map(|&v| reach_a(v) + legs[v])
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Approximate geodesic between points `i` and `j`; zero when `i == j`,
    /// `f64::INFINITY` when no anchor route connects them.
    ///
    /// The sum is always evaluated from the lower index, so the result is
    /// exactly symmetric.
    pub fn approx_geodesic(&self, i: usize, j: usize) -> Result<f64> {
        check_index(i, self.n_points())?;
        check_index(j, self.n_points())?;
        Ok(self.approx_unchecked(i, j))
    }

    pub(crate) fn approx_unchecked(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (i.min(j), i.max(j));
        self.close(|v| self.reach(a, v), b)
    }

    /// `approx_geodesic(i, j)` for every `j`, bit-identical to per-pair queries.
    pub fn approx_row(&self, i: usize) -> Result<Vec<f64>> {
        check_index(i, self.n_points())?;
        let reach_i = self.reach_vector(i);
        Ok((0..self.n_points())
            .map(|j| match j.cmp(&i) {
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => self.close(|v| reach_i[v], j),
                std::cmp::Ordering::Less => self.approx_unchecked(j, i),
            })
            .collect())
    }

    /// Full N x N approximate distance matrix, bit-identical to per-pair queries.
    pub fn approx_matrix(&self) -> Matrix {
        let n = self.n_points();
        let reach: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|a| self.reach_vector(a))
            .collect();
        let mut out = Matrix::zeros(n, n);
        for (a, reach_a) in reach.iter().enumerate() {
            for b in (a + 1)..n {
                let d = self.close(|v| reach_a[v], b);
                out.set(a, b, d);
                out.set(b, a, d);
            }
        }
        out
    }

    /// Approximate geodesic from point `i` to every anchor: component `v` is
    /// `min over all u of leg(i, a_u) + D_A[u][v]`.
    pub fn anchor_distance_vector(&self, i: usize) -> Result<Vec<f64>> {
        check_index(i, self.n_points())?;
        let legs = self.legs.row(i);
        Ok((0..self.n_anchors())
            .map(|v| {
                legs.iter()
                    .zip(self.anchors.anchor_matrix.row(v))
                    .map(|(l, d)| l + d)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect())
    }

    /// `{anchor_indices, anchor_matrix, leg_metric, s}` with infinity as `"inf"`.
    pub fn to_json(&self) -> Value {
        json!({
            "anchor_indices": self.anchors.anchor_indices,
            "anchor_matrix": json::matrix(&self.anchors.anchor_matrix),
            "leg_metric": self.leg_metric.name(),
            "s": self.s,
        })
    }
}
