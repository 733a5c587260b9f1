use std::cmp::Ordering;

use crate::cloud::{sq_dist, Point3};
use crate::error::{check_index, Error, Result};
use crate::geodesic::GeodesicEngine;

/// Neighbors of one center, nearest first, with their distances.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

fn resolve_pool(n: usize, center: usize, pool: Option<&[usize]>) -> Result<Vec<usize>> {
    check_index(center, n)?;
    match pool {
        None => Ok((0..n).filter(|&j| j != center).collect()),
        Some(pool) => {
            let mut seen = vec![false; n];
            let mut out = Vec::with_capacity(pool.len());
            for &j in pool {
                check_index(j, n)?;
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::invalid(format!("candidate pool lists {j} twice")));
                }
                if j != center {
                    out.push(j);
                }
            }
            Ok(out)
        }
    }
}

fn check_k(k: usize, pool_len: usize) -> Result<()> {
    if k == 0 || k > pool_len {
        Err(Error::invalid(format!(
            "k = {k} neighbors requested from a pool of {pool_len} (center excluded)"
        )))
    } else {
        Ok(())
    }
}

/// The `k` pool members closest to `center` by approximate geodesic.
///
/// The pool defaults to every other point and never includes the center.
/// Ties go to the lowest index. Candidates with no finite geodesic come after
/// all finite ones, ordered among themselves by straight-line distance.
pub fn geodesic_knn(
    engine: &GeodesicEngine,
    center: usize,
    k: usize,
    pool: Option<&[usize]>,
) -> Result<Neighborhood> {
    let n = engine.n_points();
    let pool = resolve_pool(n, center, pool)?;
    check_k(k, pool.len())?;

    let row = if pool.len() * 2 > n {
        Some(engine.approx_row(center)?)
    } else {
        None
    };
    let positions = engine.positions();
    let mut scored: Vec<(f64, f64, usize)> = pool
        .iter()
        .map(|&j| {
            let d = match &row {
                Some(r) => r[j],
                None => engine.approx_unchecked(center, j),
            };
            let fallback = if d.is_finite() {
                0.0
            } else {
                sq_dist(&positions[center], &positions[j])
            };
            (d, fallback, j)
        })
        .collect();
    let order = |a: &(f64, f64, usize), b: &(f64, f64, usize)| -> Ordering {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    };
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(order);

    Ok(Neighborhood {
        indices: scored.iter().map(|s| s.2).collect(),
        distances: scored.iter().map(|s| s.0).collect(),
    })
}

/// Straight-line counterpart of [`geodesic_knn`], used for comparisons.
pub fn euclidean_knn(
    positions: &[Point3],
    center: usize,
    k: usize,
    pool: Option<&[usize]>,
) -> Result<Neighborhood> {
    let pool = resolve_pool(positions.len(), center, pool)?;
    check_k(k, pool.len())?;
    let mut scored: Vec<(f64, usize)> = pool
        .iter()
        .map(|&j| (sq_dist(&positions[center], &positions[j]), j))
        .collect();
    scored.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    Ok(Neighborhood {
        indices: scored.iter().map(|s| s.1).collect(),
        distances: scored.iter().map(|s| s.0.sqrt()).collect(),
    })
}

/// Fraction of (center, neighbor) pairs whose part tags agree.
pub fn sheet_purity(centers: &[usize], neighbors: &[Vec<usize>], tags: &[i64]) -> f64 {
    let mut same = 0usize;
    let mut total = 0usize;
    for (&c, list) in centers.iter().zip(neighbors) {
        for &j in list {
            total += 1;
            if tags[j] == tags[c] {
                same += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        same as f64 / total as f64
    }
}
