//! Completion-quality metrics.
//!
//! * `cd_l2 = mean_p min_q |p-q|^2 + mean_q min_p |q-p|^2`
//! * `cd_l1 = (mean_p min_q |p-q| + mean_q min_p |q-p|) / 2`
//! * F-score at threshold `t`: harmonic mean of the fraction of `P` within
//!   `t` of `Q` (precision) and of `Q` within `t` of `P` (recall).
//!
//! Nearest neighbours come from an exact kd-tree; sums run in point order.

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::spatial::KdTree;

pub const DEFAULT_F_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChamferVariant {
    L1,
    L2,
}

impl std::str::FromStr for ChamferVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(ChamferVariant::L1),
            "l2" => Ok(ChamferVariant::L2),
            other => Err(Error::invalid(format!("unknown chamfer variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub cd_l1: f64,
    pub cd_l2: f64,
    pub f_score: f64,
    pub threshold: f64,
}

/// Squared distance from every point of `from` to its nearest point in `to`.
pub fn nearest_sq_dists(from: &PointCloud, to: &PointCloud) -> Vec<f64> {
    let tree = KdTree::new(to.positions());
    from.positions()
        .iter()
        .map(|p| tree.nearest(p).expect("clouds are nonempty").sq_dist)
        .collect()
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    values.sum::<f64>() / count as f64
}

fn chamfer_from(p_to_q: &[f64], q_to_p: &[f64], variant: ChamferVariant) -> f64 {
    match variant {
        ChamferVariant::L2 => {
            mean(p_to_q.iter().copied(), p_to_q.len()) + mean(q_to_p.iter().copied(), q_to_p.len())
        }
        ChamferVariant::L1 => {
            0.5 * (mean(p_to_q.iter().map(|d| d.sqrt()), p_to_q.len())
                + mean(q_to_p.iter().map(|d| d.sqrt()), q_to_p.len()))
        }
    }
}

fn f_score_from(p_to_q: &[f64], q_to_p: &[f64], threshold: f64) -> f64 {
    let within =
        |ds: &[f64]| ds.iter().filter(|d| d.sqrt() <= threshold).count() as f64 / ds.len() as f64;
    let precision = within(p_to_q);
    let recall = within(q_to_p);
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "f-score threshold must be > 0, got {threshold}"
        )))
    }
}

pub fn chamfer(p: &PointCloud, q: &PointCloud, variant: ChamferVariant) -> f64 {
    chamfer_from(&nearest_sq_dists(p, q), &nearest_sq_dists(q, p), variant)
}

pub fn f_score(p: &PointCloud, q: &PointCloud, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    Ok(f_score_from(
        &nearest_sq_dists(p, q),
        &nearest_sq_dists(q, p),
        threshold,
    ))
}

/// Both Chamfer variants and the F-score from one pair of nearest-neighbor sweeps.
pub fn evaluate(p: &PointCloud, q: &PointCloud, threshold: f64) -> Result<MetricReport> {
    check_threshold(threshold)?;
    let pq = nearest_sq_dists(p, q);
    let qp = nearest_sq_dists(q, p);
    Ok(MetricReport {
        cd_l1: chamfer_from(&pq, &qp, ChamferVariant::L1),
        cd_l2: chamfer_from(&pq, &qp, ChamferVariant::L2),
        f_score: f_score_from(&pq, &qp, threshold),
        threshold,
    })
}

/// Multi-stage loss: `CD(coarse, gt) + sum_i CD(stage_i, gt)`.
pub fn total_loss(
    coarse: &PointCloud,
    stages: &[PointCloud],
    gt: &PointCloud,
    variant: ChamferVariant,
) -> f64 {
    stages.iter().fold(chamfer(coarse, gt, variant), |acc, s| {
        acc + chamfer(s, gt, variant)
    })
}
