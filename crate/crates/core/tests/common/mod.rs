//! Brute-force references and cloud generators shared by the integration tests.
#![allow(dead_code)]

use manifold_geo::cloud::{Point3, PointCloud};
use manifold_geo::graph::{build_knn_graph, ProximityGraph};
use manifold_geo::sampling::SampleResult;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
                rng.random_range(-scale..scale),
            ]
        })
        .collect()
}

/// Uniform points snapped to a coarse lattice, so distance ties are common.
/// Duplicates are removed, so fewer than `n` points may come back.
pub fn lattice_points(rng: &mut ChaCha8Rng, n: usize, side: i32) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::with_capacity(n);
    while out.len() < n {
        let p = [
            rng.random_range(0..side) as f64,
            rng.random_range(0..side) as f64,
            rng.random_range(0..side) as f64,
        ];
        if !out.contains(&p) {
            out.push(p);
        }
        if out.len() as i32 == side * side * side {
            break;
        }
    }
    out
}

/// A random cloud whose k-NN graph has a single component.
pub fn connected_cloud(
    rng: &mut ChaCha8Rng,
    n: usize,
    k_graph: usize,
) -> (PointCloud, ProximityGraph) {
    loop {
        let cloud = PointCloud::new(uniform_points(rng, n, 1.0)).unwrap();
        let graph = build_knn_graph(&cloud, k_graph).unwrap();
        if graph.component_count() == 1 {
            return (cloud, graph);
        }
    }
}

fn sq(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// O(N M) nearest squared distance from each point of `from` into `to`.
pub fn brute_nearest(from: &[Point3], to: &[Point3]) -> Vec<f64> {
    from.iter()
        .map(|p| to.iter().map(|q| sq(p, q)).fold(f64::INFINITY, f64::min))
        .collect()
}

pub fn brute_chamfer_l2(p: &[Point3], q: &[Point3]) -> f64 {
    let a = brute_nearest(p, q);
    let b = brute_nearest(q, p);
    a.iter().sum::<f64>() / a.len() as f64 + b.iter().sum::<f64>() / b.len() as f64
}

pub fn brute_chamfer_l1(p: &[Point3], q: &[Point3]) -> f64 {
    let a = brute_nearest(p, q);
    let b = brute_nearest(q, p);
    0.5 * (a.iter().map(|d| d.sqrt()).sum::<f64>() / a.len() as f64
        + b.iter().map(|d| d.sqrt()).sum::<f64>() / b.len() as f64)
}

pub fn brute_f_score(p: &[Point3], q: &[Point3], t: f64) -> f64 {
    let frac = |ds: Vec<f64>| ds.iter().filter(|d| d.sqrt() <= t).count() as f64 / ds.len() as f64;
    let precision = frac(brute_nearest(p, q));
    let recall = frac(brute_nearest(q, p));
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Re-derives every FPS step from scratch: the chosen point must maximize
/// the distance to the already chosen set, lowest index among ties.
pub fn check_fps_greedy(
    points: &[Point3],
    m: usize,
    seed: usize,
    got: &SampleResult,
) -> Result<(), String> {
    if got.indices.len() != m || got.min_dists.len() != m {
        return Err(format!("expected {m} picks, got {}", got.indices.len()));
    }
    if got.indices[0] != seed || got.min_dists[0] != f64::INFINITY {
        return Err("first pick must be the seed at infinite distance".into());
    }
    for t in 1..m {
        let chosen = &got.indices[..t];
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let d = chosen
                .iter()
                .map(|&c| sq(p, &points[c]).sqrt())
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((i, d));
            }
        }
        let (want, d) = best.unwrap();
        if got.indices[t] != want {
            return Err(format!(
                "step {t}: picked {} but maximin choice is {want}",
                got.indices[t]
            ));
        }
        if got.min_dists[t] != d {
            return Err(format!("step {t}: min_dist {} vs {d}", got.min_dists[t]));
        }
    }
    Ok(())
}
