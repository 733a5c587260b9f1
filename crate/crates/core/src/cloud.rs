//! Point cloud container and Euclidean helpers.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub type Point3 = [f64; 3];

#[inline]
pub fn sq_dist(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[inline]
pub fn dist(a: &Point3, b: &Point3) -> f64 {
    sq_dist(a, b).sqrt()
}

/// `N >= 1` points in 3-space with optional per-point feature rows.
///
/// Immutable after construction; every constructor checks that coordinates
/// are finite and that feature rows (if any) line up with the points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    positions: Vec<Point3>,
    features: Option<Matrix>,
}

impl PointCloud {
    pub fn new(positions: Vec<Point3>) -> Result<Self> {
        Self::with_features(positions, None)
    }

    pub fn with_features(positions: Vec<Point3>, features: Option<Matrix>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::EmptyInput("point cloud has no points".into()));
        }
        if let Some(i) = positions
            .iter()
            .position(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(Error::NonFinite(format!("coordinates of point {i}")));
        }
        if let Some(f) = &features {
            if f.rows() != positions.len() {
                return Err(Error::WidthMismatch {
                    expected: positions.len(),
                    found: f.rows(),
                    context: "feature row count",
                });
            }
            if !f.all_finite() {
                return Err(Error::NonFinite("point features".into()));
            }
        }
        Ok(PointCloud {
            positions,
            features,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    /// Always false for a constructed cloud; provided for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    #[inline]
    pub fn position(&self, i: usize) -> &Point3 {
        &self.positions[i]
    }

    pub fn features(&self) -> Option<&Matrix> {
        self.features.as_ref()
    }

    pub fn feature_width(&self) -> usize {
        self.features.as_ref().map_or(0, Matrix::cols)
    }

    /// Feature rows if present, otherwise the coordinates as a 3-wide matrix.
    pub fn features_or_positions(&self) -> Matrix {
        match &self.features {
            Some(f) => f.clone(),
            None => self.positions_matrix(),
        }
    }

    pub fn positions_matrix(&self) -> Matrix {
        let data = self
            .positions
            .iter()
            .flat_map(|p| p.iter().copied())
            .collect();
        Matrix::from_vec(self.len(), 3, data).expect("3 columns per point")
    }

    /// Sub-cloud with the listed points (features carried along).
    pub fn subset(&self, indices: &[usize]) -> Result<PointCloud> {
        for &i in indices {
            crate::error::check_index(i, self.len())?;
        }
        let positions = indices.iter().map(|&i| self.positions[i]).collect();
        let features = self.features.as_ref().map(|f| f.select_rows(indices));
        PointCloud::with_features(positions, features)
    }
}

/// Labels attached to a cloud by the synthetic generators.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudMeta {
    pub name: String,
    /// Which sheet/component each point was sampled from, when known.
    #[serde(default)]
    pub ground_truth_part_id: Option<Vec<i64>>,
}

impl CloudMeta {
    pub fn named(name: impl Into<String>) -> Self {
        CloudMeta {
            name: name.into(),
            ground_truth_part_id: None,
        }
    }

    pub fn validate_for(&self, cloud: &PointCloud) -> Result<()> {
        match &self.ground_truth_part_id {
            Some(tags) if tags.len() != cloud.len() => Err(Error::WidthMismatch {
                expected: cloud.len(),
                found: tags.len(),
                context: "part id tags",
            }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(matches!(PointCloud::new(vec![]), Err(Error::EmptyInput(_))));
        assert!(matches!(
            PointCloud::new(vec![[0.0, f64::NAN, 0.0]]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn feature_rows_must_match() {
        let f = Matrix::zeros(2, 1);
        let err = PointCloud::with_features(vec![[0.0; 3]], Some(f)).unwrap_err();
        assert!(matches!(err, Error::WidthMismatch { .. }));
    }

    #[test]
    fn subset_keeps_features() {
        let f = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let c = PointCloud::with_features(vec![[0.0; 3], [1.0; 3], [2.0; 3]], Some(f)).unwrap();
        let s = c.subset(&[2, 0]).unwrap();
        assert_eq!(s.positions(), &[[2.0; 3], [0.0; 3]]);
        assert_eq!(s.features().unwrap().to_rows(), vec![vec![3.0], vec![1.0]]);
    }
}
