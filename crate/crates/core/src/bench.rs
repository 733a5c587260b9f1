//! Anchor-count scaling benchmark for the geodesic engine.
//!
//! For each trial a fresh swiss roll is sampled and its proximity graph
//! built once. Every anchor count then gets its own engine (graph legs,
//! all anchor pairs considered), and a fixed batch of random pairs is queried
//! and compared with exact Dijkstra distances. Because FPS with a fixed seed
//! produces nested prefixes, the error can only shrink as anchors are added.

use std::collections::BTreeMap;
use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geodesic::{build_engine, dijkstra, EngineConfig, LegMetric};
use crate::graph::{build_knn_graph, ProximityGraph, DEFAULT_K_GRAPH};
use crate::json::{num, nums};
use crate::synthetic::{gen_synthetic, SyntheticKind, SyntheticParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub n: usize,
    pub anchor_counts: Vec<usize>,
    pub trials: usize,
    pub queries: usize,
    pub k_graph: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n: 2048,
            anchor_counts: vec![64, 128, 256, 2048],
            trials: 5,
            queries: 256,
            k_graph: DEFAULT_K_GRAPH,
            seed: 0,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorTiming {
    pub m: usize,
    /// Medians over trials.
    pub build_ms: f64,
    pub mean_query_us: f64,
    pub total_ms: f64,
    pub mean_abs_rel_error_vs_oracle: f64,
    pub build_ms_samples: Vec<f64>,
    pub query_us_samples: Vec<f64>,
    pub error_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n_points: usize,
    pub anchor_counts: Vec<usize>,
    pub trials: usize,
    pub queries: usize,
    pub k_graph: usize,
    pub results: Vec<AnchorTiming>,
    pub environment: String,
}

impl BenchReport {
    pub fn to_json(&self) -> Value {
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                json!({
                    "m": r.m,
                    "build_ms": num(r.build_ms),
                    "mean_query_us": num(r.mean_query_us),
                    "total_ms": num(r.total_ms),
                    "mean_abs_rel_error_vs_oracle": num(r.mean_abs_rel_error_vs_oracle),
                    "samples": {
                        "build_ms": nums(&r.build_ms_samples),
                        "mean_query_us": nums(&r.query_us_samples),
                        "mean_abs_rel_error_vs_oracle": nums(&r.error_samples),
                    }
                })
            })
            .collect();
        json!({
            "n_points": self.n_points,
            "anchor_counts": self.anchor_counts,
            "trials": self.trials,
            "queries": self.queries,
            "k_graph": self.k_graph,
            "leg_metric": LegMetric::Graph.name(),
            "results": results,
            "environment": self.environment,
        })
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

fn validate(cfg: &BenchConfig) -> Result<()> {
    if cfg.anchor_counts.is_empty() {
        return Err(Error::invalid("anchor_counts is empty"));
    }
    if cfg.anchor_counts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("anchor_counts must be strictly increasing"));
    }
    if cfg.anchor_counts[0] == 0 || *cfg.anchor_counts.last().unwrap() > cfg.n {
        return Err(Error::invalid(format!(
            "anchor counts must lie in 1..={}, got {:?}",
            cfg.n, cfg.anchor_counts
        )));
    }
    if cfg.trials == 0 || cfg.queries == 0 {
        return Err(Error::invalid("trials and queries must be >= 1"));
    }
    if cfg.n < 4 {
        return Err(Error::invalid("benchmark clouds need n >= 4"));
    }
    Ok(())
}

/// A connected swiss roll; bumps the seed if the k-NN graph falls apart.
fn connected_cloud(cfg: &BenchConfig, trial: usize) -> Result<(PointCloud, ProximityGraph)> {
    for attempt in 0..16u64 {
        let seed = cfg.seed + trial as u64 + attempt * 1_000_003;
        let (cloud, _) = gen_synthetic(
            SyntheticKind::SwissRoll,
            cfg.n,
            &SyntheticParams::new(),
            seed,
        )?;
        let graph = build_knn_graph(&cloud, cfg.k_graph)?;
        if graph.component_count() == 1 {
            return Ok((cloud, graph));
        }
    }
    Err(Error::invalid(
        "could not sample a connected benchmark cloud",
    ))
}

pub fn bench_anchors(cfg: &BenchConfig) -> Result<BenchReport> {
    validate(cfg)?;
    let counts = &cfg.anchor_counts;
    let mut build = vec![Vec::new(); counts.len()];
    let mut query = vec![Vec::new(); counts.len()];
    let mut total = vec![Vec::new(); counts.len()];
    let mut error = vec![Vec::new(); counts.len()];

    for trial in 0..cfg.trials {
        let (cloud, graph) = connected_cloud(cfg, trial)?;

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (0x9e37_79b9 + trial as u64));
        let pairs: Vec<(usize, usize)> = (0..cfg.queries)
            .map(|_| {
                let i = rng.random_range(0..cfg.n);
                let mut j = rng.random_range(0..cfg.n - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect();
        let mut rows = BTreeMap::new();
        for &(i, _) in &pairs {
            if let std::collections::btree_map::Entry::Vacant(e) = rows.entry(i) {
                e.insert(dijkstra(&graph, i)?);
            }
        }
        let oracle: Vec<f64> = pairs.iter().map(|&(i, j)| rows[&i][j]).collect();

        for (slot, &m) in counts.iter().enumerate() {
            let mut ecfg = EngineConfig::new(m, LegMetric::Graph)
                .exhaustive()
                .with_fps_seed(0);
            ecfg.parallel = cfg.parallel;

            let t0 = Instant::now();
            let engine = build_engine(&cloud, &graph, &ecfg)?;
            let build_ms = t0.elapsed().as_secs_f64() * 1e3;

            let t1 = Instant::now();
            let answers: Vec<f64> = pairs
                .iter()
                .map(|&(i, j)| black_box(engine.approx_geodesic(black_box(i), black_box(j))))
                .collect::<Result<_>>()?;
            let query_s = t1.elapsed().as_secs_f64();

            let rel: f64 = answers
                .iter()
                .zip(&oracle)
                .map(|(a, o)| (a - o).abs() / o)
                .sum::<f64>()
                / pairs.len() as f64;

            build[slot].push(build_ms);
            query[slot].push(query_s * 1e6 / pairs.len() as f64);
            total[slot].push(build_ms + query_s * 1e3);
            error[slot].push(rel);
        }
    }

    let results = counts
        .iter()
        .enumerate()
        .map(|(slot, &m)| AnchorTiming {
            m,
            build_ms: median(&build[slot]),
            mean_query_us: median(&query[slot]),
            total_ms: median(&total[slot]),
            mean_abs_rel_error_vs_oracle: median(&error[slot]),
            build_ms_samples: build[slot].clone(),
            query_us_samples: query[slot].clone(),
            error_samples: error[slot].clone(),
        })
        .collect();

    let environment = format!(
        "{} {}, {} hardware threads, {} engine build",
        std::env::consts::OS,
        std::env::consts::ARCH,
        std::thread::available_parallelism().map_or(1, |n| n.get()),
        if cfg.parallel {
            "parallel"
        } else {
            "sequential"
        }
    );
    Ok(BenchReport {
        n_points: cfg.n,
        anchor_counts: counts.clone(),
        trials: cfg.trials,
        queries: cfg.queries,
        k_graph: cfg.k_graph,
        results,
        environment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_run_has_zero_error_at_saturation() {
        let cfg = BenchConfig {
            n: 200,
            anchor_counts: vec![8, 32, 200],
            trials: 2,
            queries: 50,
            ..Default::default()
        };
        let report = bench_anchors(&cfg).unwrap();
        let errs: Vec<f64> = report
            .results
            .iter()
            .map(|r| r.mean_abs_rel_error_vs_oracle)
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
        assert!(errs[2] < 1e-12);
        assert!(report.results.iter().all(|r| r.build_ms > 0.0));
    }

    #[test]
    fn rejects_bad_counts() {
        let mut cfg = BenchConfig {
            n: 100,
            anchor_counts: vec![10, 10],
            ..Default::default()
        };
        assert!(bench_anchors(&cfg).is_err());
        cfg.anchor_counts = vec![10, 101];
        assert!(bench_anchors(&cfg).is_err());
    }
}
