//! Geodesic-relational attention, forward pass only.
//!
//! For a center `i` with neighbors `j`:
//!
//! * relation logits `r_ij = MLP([f_i - f_j, d_g(i, j)])`, one per channel;
//! * weights `alpha_ij = softmax_j(r_ij)` taken separately in every channel;
//! * refined feature `f'_i = sum_j alpha_ij * f_j` (elementwise).
//!
//! The elementwise product forces `alpha_ij` to be a vector, so the softmax
//! runs per channel over the neighbor axis.

use rayon::prelude::*;

use super::grouping::GroupedLevel;
use super::mlp::RelationMlpParams;
use crate::error::{check_index, Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// One refined row per center, width C.
    pub refined: Matrix,
    /// Per center, a `k x C` block of attention weights.
    pub weights: Vec<Matrix>,
}

/// Per-channel softmax of `logits` (k x C) over rows, then the weighted sum of
/// `neighbor_features`. Returns `(weights, refined_row)`.
///
/// The per-channel maximum is subtracted before exponentiation.
pub fn softmax_aggregate(logits: &Matrix, neighbor_features: &[&[f64]]) -> (Matrix, Vec<f64>) {
    let (k, c) = (logits.rows(), logits.cols());
    debug_assert_eq!(neighbor_features.len(), k);
    let mut weights = Matrix::zeros(k, c);
    let mut refined = vec![0.0; c];
    for ch in 0..c {
        let max = (0..k)
            .map(|j| logits.get(j, ch))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for j in 0..k {
            let e = (logits.get(j, ch) - max).exp();
            weights.set(j, ch, e);
            total += e;
        }
        let mut acc = 0.0;
        for (j, f) in neighbor_features.iter().enumerate() {
            let w = weights.get(j, ch) / total;
            weights.set(j, ch, w);
            acc += w * f[ch];
        }
        refined[ch] = acc;
    }
    (weights, refined)
}

pub fn gra_t_forward(
    features: &Matrix,
    centers: &[usize],
    neighbor_indices: &[Vec<usize>],
    neighbor_geodesics: &[Vec<f64>],
    params: &RelationMlpParams,
) -> Result<AttentionOutput> {
    let width = features.cols();
    if width == 0 {
        return Err(Error::invalid(
            "attention needs at least one feature channel",
        ));
    }
    if params.input_width() != width + 1 {
        return Err(Error::WidthMismatch {
            expected: width + 1,
            found: params.input_width(),
            context: "relation mlp input width vs C + 1",
        });
    }
    if params.output_width() != width {
        return Err(Error::WidthMismatch {
            expected: width,
            found: params.output_width(),
            context: "relation mlp output width vs C",
        });
    }
    if neighbor_indices.len() != centers.len() || neighbor_geodesics.len() != centers.len() {
        return Err(Error::WidthMismatch {
            expected: centers.len(),
            found: neighbor_indices.len().min(neighbor_geodesics.len()),
            context: "neighbor lists per center",
        });
    }
    if !features.all_finite() {
        return Err(Error::NonFinite("attention input features".into()));
    }
    for (c, (idx, geo)) in centers
        .iter()
        .zip(neighbor_indices.iter().zip(neighbor_geodesics))
    {
        check_index(*c, features.rows())?;
        if idx.is_empty() {
            return Err(Error::invalid(format!("center {c} has no neighbors")));
        }
        if idx.len() != geo.len() {
            return Err(Error::WidthMismatch {
                expected: idx.len(),
                found: geo.len(),
                context: "geodesics per neighbor",
            });
        }
        for &j in idx {
            check_index(j, features.rows())?;
        }
        if !geo.iter().all(|d| d.is_finite()) {
            return Err(Error::NonFinite(format!("geodesics of center {c}")));
        }
    }

    let per_center: Vec<(Matrix, Vec<f64>)> = centers
        .par_iter()
        .zip(
            neighbor_indices
                .par_iter()
                .zip(neighbor_geodesics.par_iter()),
        )
        .map(|(&i, (idx, geo))| {
            let fi = features.row(i);
            let mut logits = Matrix::zeros(idx.len(), width);
            let mut input = vec![0.0; width + 1];
            let mut hidden = vec![0.0; params.hidden_width()];
            for (row, (&j, &d)) in idx.iter().zip(geo).enumerate() {
                let fj = features.row(j);
                for ch in 0..width {
                    input[ch] = fi[ch] - fj[ch];
                }
                input[width] = d;
                params.forward_into(&input, &mut hidden, logits.row_mut(row));
            }
            let neighbors: Vec<&[f64]> = idx.iter().map(|&j| features.row(j)).collect();
            softmax_aggregate(&logits, &neighbors)
        })
        .collect();

    let mut refined = Matrix::zeros(centers.len(), width);
    let mut weights = Vec::with_capacity(centers.len());
    for (r, (w, f)) in per_center.into_iter().enumerate() {
        refined.row_mut(r).copy_from_slice(&f);
        weights.push(w);
    }
    if !refined.all_finite() {
        return Err(Error::Invariant(
            "attention produced non-finite output".into(),
        ));
    }
    Ok(AttentionOutput { refined, weights })
}

/// Runs attention over one grouped level's centers and geodesic neighbors.
pub fn attend_level(
    features: &Matrix,
    level: &GroupedLevel,
    params: &RelationMlpParams,
) -> Result<AttentionOutput> {
    gra_t_forward(
        features,
        &level.center_indices,
        &level.neighbor_indices,
        &level.neighbor_geodesics,
        params,
    )
}
