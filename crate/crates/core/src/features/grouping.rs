//! Hierarchical geodesic neighborhood grouping.
//!
//! Each level samples centers by FPS from the previous level (the first from
//! the whole cloud), picks every center's `k` nearest points by approximate
//! geodesic, and summarizes the neighborhood as
//! `max_j MLP([f_j, x_j - x_center, d_g(center, j)])`, channelwise.

use rayon::prelude::*;
use serde_json::{json, Value};

use super::knn::geodesic_knn;
use super::mlp::MlpParams;
use crate::cloud::{Point3, PointCloud};
use crate::error::{Error, Result};
use crate::geodesic::GeodesicEngine;
use crate::json;
use crate::matrix::Matrix;
use crate::sampling::fps_points;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborPool {
    /// Neighbors come from every point of the input cloud.
    #[default]
    FullCloud,
    /// Neighbors come from the current level's centers only.
    Level,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupingConfig {
    pub level_sizes: Vec<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub fps_seed: usize,
    #[serde(default)]
    pub pool: NeighborPool,
}

fn default_k() -> usize {
    16
}

impl GroupingConfig {
    pub fn new(level_sizes: Vec<usize>, k: usize) -> Self {
        GroupingConfig {
            level_sizes,
            k,
            fps_seed: 0,
            pool: NeighborPool::FullCloud,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedLevel {
    /// Indices into the input cloud.
    pub center_indices: Vec<usize>,
    /// Per center, `k` distinct cloud indices, center excluded, nearest first.
    pub neighbor_indices: Vec<Vec<usize>>,
    pub neighbor_geodesics: Vec<Vec<f64>>,
    /// One row per center.
    pub descriptors: Matrix,
}

impl GroupedLevel {
    pub fn len(&self) -> usize {
        self.center_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_indices.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "center_indices": self.center_indices,
            "neighbor_indices": self.neighbor_indices,
            "neighbor_geodesics": self.neighbor_geodesics.iter().map(|g| json::nums(g)).collect::<Vec<_>>(),
            "descriptors": json::matrix(&self.descriptors),
        })
    }
}

fn validate(config: &GroupingConfig, n: usize) -> Result<()> {
    let sizes = &config.level_sizes;
    if sizes.is_empty() {
        return Err(Error::invalid("level_sizes must list at least one level"));
    }
    if sizes[0] > n || sizes.contains(&0) {
        return Err(Error::invalid(format!(
            "level sizes must lie in 1..={n}, got {sizes:?}"
        )));
    }
    if sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid(format!(
            "level_sizes must be strictly decreasing, got {sizes:?}"
        )));
    }
    let pool_size = match config.pool {
        NeighborPool::FullCloud => n - 1,
        NeighborPool::Level => sizes[sizes.len() - 1] - 1,
    };
    if config.k == 0 || config.k > pool_size {
        return Err(Error::invalid(format!(
            "k = {} is infeasible for a neighbor pool of {pool_size}",
            config.k
        )));
    }
    Ok(())
}

pub fn gng_build(
    cloud: &PointCloud,
    engine: &GeodesicEngine,
    config: &GroupingConfig,
    descriptor_mlp: &MlpParams,
) -> Result<Vec<GroupedLevel>> {
    let n = cloud.len();
    if engine.n_points() != n {
        return Err(Error::WidthMismatch {
            expected: n,
            found: engine.n_points(),
            context: "engine point count vs cloud",
        });
    }
    validate(config, n)?;
    let features = cloud.features_or_positions();
    let expected_in = features.cols() + 4;
    if descriptor_mlp.input_width() != expected_in {
        return Err(Error::WidthMismatch {
            expected: expected_in,
            found: descriptor_mlp.input_width(),
            context: "descriptor mlp input width vs C + 4",
        });
    }

    let positions = cloud.positions();
    let mut levels = Vec::with_capacity(config.level_sizes.len());
    let mut parent: Vec<usize> = (0..n).collect();
    let mut seed = config.fps_seed;
    for &size in &config.level_sizes {
        let parent_points: Vec<Point3> = parent.iter().map(|&i| positions[i]).collect();
        let picked = fps_points(&parent_points, size, seed)?;
        let centers: Vec<usize> = picked.indices.iter().map(|&p| parent[p]).collect();

        let pool = match config.pool {
            NeighborPool::FullCloud => None,
            NeighborPool::Level => Some(centers.as_slice()),
        };
        let hoods = centers
            .par_iter()
            .map(|&c| geodesic_knn(engine, c, config.k, pool))
            .collect::<Result<Vec<_>>>()?;

        let mut descriptors = Matrix::zeros(centers.len(), descriptor_mlp.output_width());
        for (r, (&c, hood)) in centers.iter().zip(&hoods).enumerate() {
            if let Some(d) = hood.distances.iter().find(|d| !d.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "geodesic {d} from center {c}; the graph leaves it without {} reachable neighbors",
                    config.k
                )));
            }
            describe(
                &features,
                positions,
                c,
                &hood.indices,
                &hood.distances,
                descriptor_mlp,
                descriptors.row_mut(r),
            );
        }

        levels.push(GroupedLevel {
            center_indices: centers.clone(),
            neighbor_indices: hoods.iter().map(|h| h.indices.clone()).collect(),
            neighbor_geodesics: hoods.into_iter().map(|h| h.distances).collect(),
            descriptors,
        });
        // the next level samples from these centers, starting at the same point
        parent = centers;
        seed = 0;
    }
    Ok(levels)
}

fn describe(
    features: &Matrix,
    positions: &[Point3],
    center: usize,
    neighbors: &[usize],
    geodesics: &[f64],
    mlp: &MlpParams,
    out: &mut [f64],
) {
    let width = features.cols();
    let mut input = vec![0.0; width + 4];
    let mut hidden = vec![0.0; mlp.hidden_width()];
    let mut row = vec![0.0; mlp.output_width()];
    out.fill(f64::NEG_INFINITY);
    for (&j, &d) in neighbors.iter().zip(geodesics) {
        input[..width].copy_from_slice(features.row(j));
        for a in 0..3 {
            input[width + a] = positions[j][a] - positions[center][a];
        }
        input[width + 3] = d;
        mlp.forward_into(&input, &mut hidden, &mut row);
        for (o, v) in out.iter_mut().zip(&row) {
            *o = o.max(*v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{build_engine, EngineConfig, LegMetric};
    use crate::graph::build_knn_graph;
    use crate::synthetic::{gen_synthetic, SyntheticKind, SyntheticParams};

    fn setup(n: usize) -> (PointCloud, GeodesicEngine) {
        let c = gen_synthetic(SyntheticKind::Grid, n, &SyntheticParams::new(), 0)
            .unwrap()
            .0;
        let g = build_knn_graph(&c, 8).unwrap();
        let e = build_engine(&c, &g, &EngineConfig::new(8.min(n), LegMetric::Euclidean)).unwrap();
        (c, e)
    }

    #[test]
    fn full_level_covers_every_point() {
        let (c, e) = setup(16);
        let mlp = MlpParams::seeded(7, 6, 4, 1.0, 0).unwrap();
        let levels = gng_build(&c, &e, &GroupingConfig::new(vec![16], 1), &mlp).unwrap();
        let mut centers = levels[0].center_indices.clone();
        centers.sort_unstable();
        assert_eq!(centers, (0..16).collect::<Vec<_>>());
        for (c, nb) in levels[0]
            .center_indices
            .iter()
            .zip(&levels[0].neighbor_indices)
        {
            assert_eq!(nb.len(), 1);
            assert_ne!(nb[0], *c);
        }
    }

    #[test]
    fn nested_levels() {
        let (c, e) = setup(100);
        let mlp = MlpParams::seeded(7, 6, 4, 1.0, 0).unwrap();
        let levels = gng_build(&c, &e, &GroupingConfig::new(vec![40, 10], 5), &mlp).unwrap();
        assert_eq!(levels[0].len(), 40);
        assert_eq!(levels[1].len(), 10);
        assert!(levels[1]
            .center_indices
            .iter()
            .all(|i| levels[0].center_indices.contains(i)));
        for l in &levels {
            assert_eq!(l.descriptors.rows(), l.len());
            for (c, (nb, geo)) in l
                .center_indices
                .iter()
                .zip(l.neighbor_indices.iter().zip(&l.neighbor_geodesics))
            {
                assert_eq!(nb.len(), 5);
                assert!(!nb.contains(c));
                assert!(geo.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn level_pool_stays_inside_level() {
        let (c, e) = setup(64);
        let mlp = MlpParams::seeded(7, 6, 4, 1.0, 0).unwrap();
        let mut cfg = GroupingConfig::new(vec![20], 3);
        cfg.pool = NeighborPool::Level;
        let levels = gng_build(&c, &e, &cfg, &mlp).unwrap();
        let centers = &levels[0].center_indices;
        assert!(levels[0]
            .neighbor_indices
            .iter()
            .flatten()
            .all(|j| centers.contains(j)));
    }

    #[test]
    fn config_errors() {
        let (c, e) = setup(16);
        let mlp = MlpParams::seeded(7, 6, 4, 1.0, 0).unwrap();
        assert!(gng_build(&c, &e, &GroupingConfig::new(vec![8, 8], 2), &mlp).is_err());
        assert!(gng_build(&c, &e, &GroupingConfig::new(vec![17], 2), &mlp).is_err());
        assert!(gng_build(&c, &e, &GroupingConfig::new(vec![], 2), &mlp).is_err());
        assert!(gng_build(&c, &e, &GroupingConfig::new(vec![8], 16), &mlp).is_err());
        let wrong = MlpParams::seeded(3, 6, 4, 1.0, 0).unwrap();
        assert!(gng_build(&c, &e, &GroupingConfig::new(vec![8], 2), &wrong).is_err());
    }
}
