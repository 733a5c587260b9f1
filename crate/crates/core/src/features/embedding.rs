use crate::error::{check_index, Error, Result};
use crate::geodesic::GeodesicEngine;
use crate::matrix::Matrix;

/// Appends each point's geodesic distances to all anchors to its features.
///
/// Row `r` of `features` belongs to point `point_indices[r]`; the output row
/// is `[features[r], anchor_distance_vector(point_indices[r])]`, so the width
/// grows from `C` to `C + M`. `features` may have zero columns.
pub fn mpe_augment(
    features: &Matrix,
    engine: &GeodesicEngine,
    point_indices: &[usize],
) -> Result<Matrix> {
    if features.rows() != point_indices.len() {
        return Err(Error::WidthMismatch {
            expected: point_indices.len(),
            found: features.rows(),
            context: "feature rows vs point indices",
        });
    }
    for &i in point_indices {
        check_index(i, engine.n_points())?;
    }
    let c = features.cols();
    let m = engine.n_anchors();
    let mut out = Matrix::zeros(point_indices.len(), c + m);
    for (r, &i) in point_indices.iter().enumerate() {
        let row = out.row_mut(r);
        row[..c].copy_from_slice(features.row(r));
        row[c..].copy_from_slice(&engine.anchor_distance_vector(i)?);
    }
    Ok(out)
}
