//! Farthest point sampling.

use crate::cloud::{dist, Point3, PointCloud};
use crate::error::{check_index, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    /// Selected point indices in selection order; `indices[0]` is the seed.
    pub indices: Vec<usize>,
    /// `min_dists[t]` is the distance from `indices[t]` to the closest of
    /// `indices[..t]`; infinite for the seed.
    pub min_dists: Vec<f64>,
    /// Largest distance from any point to its nearest selected point.
    pub coverage_radius: f64,
}

pub fn fps(cloud: &PointCloud, m: usize, seed_index: usize) -> Result<SampleResult> {
    fps_points(cloud.positions(), m, seed_index)
}

/// Greedy maximin selection: each step picks the unselected point whose
/// distance to the selected prefix is largest, lowest index on ties.
pub fn fps_points(points: &[Point3], m: usize, seed_index: usize) -> Result<SampleResult> {
    let n = points.len();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("fps: need 1 <= m <= {n}, got {m}")));
    }
    check_index(seed_index, n)?;

    let mut selected = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut indices = Vec::with_capacity(m);
    let mut min_dists = Vec::with_capacity(m);

    let mut current = seed_index;
    let mut achieved = f64::INFINITY;
    loop {
        selected[current] = true;
        indices.push(current);
        min_dists.push(achieved);
        let anchor = points[current];
        for (d, p) in nearest.iter_mut().zip(points) {
            let step = dist(p, &anchor);
            if step < *d {
                *d = step;
            }
        }
        if indices.len() == m {
            break;
        }
        let mut best = None::<(usize, f64)>;
        for i in 0..n {
            if selected[i] {
                continue;
            }
            match best {
                Some((_, d)) if nearest[i] <= d => {}
                _ => best = Some((i, nearest[i])),
            }
        }
        let (next, d) = best.expect("m <= n leaves an unselected point");
        current = next;
        achieved = d;
    }

    let coverage_radius = nearest.iter().copied().fold(0.0, f64::max);
    Ok(SampleResult {
        indices,
        min_dists,
        coverage_radius,
    })
}
