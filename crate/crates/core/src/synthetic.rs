//! Seeded synthetic manifolds for tests and benchmarks.
//!
//! Coordinates are emitted raw; nothing is normalized to a unit sphere or cube.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{CloudMeta, Point3, PointCloud};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    SwissRoll,
    TwoPlanes,
    Cylinder,
    Grid,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::SwissRoll => "swiss_roll",
            SyntheticKind::TwoPlanes => "two_planes",
            SyntheticKind::Cylinder => "cylinder",
            SyntheticKind::Grid => "grid",
        }
    }

    /// Accepted parameter names and their defaults.
    fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            SyntheticKind::SwissRoll => &[("turns", 1.5), ("width", 10.0), ("noise", 0.0)],
            SyntheticKind::TwoPlanes => &[("gap", 0.05), ("spacing", 0.02), ("jitter", 0.1)],
            SyntheticKind::Cylinder => &[("radius", 1.0), ("height", 2.0)],
            SyntheticKind::Grid => &[("spacing", 1.0)],
        }
    }
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "swiss_roll" => Ok(SyntheticKind::SwissRoll),
            "two_planes" => Ok(SyntheticKind::TwoPlanes),
            "cylinder" => Ok(SyntheticKind::Cylinder),
            "grid" => Ok(SyntheticKind::Grid),
            other => Err(Error::invalid(format!("unknown synthetic kind `{other}`"))),
        }
    }
}

/// Named real parameters; missing names take the per-kind default.
pub type SyntheticParams = BTreeMap<String, f64>;

fn resolve(kind: SyntheticKind, params: &SyntheticParams) -> Result<BTreeMap<&'static str, f64>> {
    let defaults = kind.defaults();
    for key in params.keys() {
        if !defaults.iter().any(|(k, _)| k == key) {
            return Err(Error::invalid(format!(
                "parameter `{key}` does not apply to {}",
                kind.name()
            )));
        }
    }
    let mut out = BTreeMap::new();
    for &(k, d) in defaults {
        let v = params.get(k).copied().unwrap_or(d);
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "{}: `{k}` must be finite",
                kind.name()
            )));
        }
        out.insert(k, v);
    }
    Ok(out)
}

fn require_positive(kind: SyntheticKind, name: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{}: `{name}` must be > 0, got {v}",
            kind.name()
        )))
    }
}

pub fn gen_synthetic(
    kind: SyntheticKind,
    n: usize,
    params: &SyntheticParams,
    seed: u64,
) -> Result<(PointCloud, CloudMeta)> {
    if n < 4 {
        return Err(Error::invalid(format!(
            "synthetic clouds need n >= 4, got {n}"
        )));
    }
    let p = resolve(kind, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut meta = CloudMeta::named(kind.name());

    let cloud = match kind {
        SyntheticKind::Grid => {
            require_positive(kind, "spacing", p["spacing"])?;
            PointCloud::new(lattice(n, p["spacing"], 0.0, 0.0, &mut rng))?
        }
        SyntheticKind::TwoPlanes => {
            let (gap, spacing, jitter) = (p["gap"], p["spacing"], p["jitter"]);
            require_positive(kind, "gap", gap)?;
            require_positive(kind, "spacing", spacing)?;
            if !(0.0..0.5).contains(&jitter) {
                return Err(Error::invalid("two_planes: `jitter` must lie in [0, 0.5)"));
            }
            let lower = n.div_ceil(2);
            let mut positions = lattice(lower, spacing, 0.0, jitter, &mut rng);
            positions.extend(lattice(n - lower, spacing, gap, jitter, &mut rng));
            let mut tags = vec![0_i64; lower];
            tags.resize(n, 1);
            meta.ground_truth_part_id = Some(tags);
            PointCloud::new(positions)?
        }
        SyntheticKind::SwissRoll => {
            let (turns, width, noise) = (p["turns"], p["width"], p["noise"]);
            if turns < 1.0 {
                return Err(Error::invalid("swiss_roll: `turns` must be >= 1"));
            }
            require_positive(kind, "width", width)?;
            if noise < 0.0 {
                return Err(Error::invalid("swiss_roll: `noise` must be >= 0"));
            }
            let t0 = 1.5 * PI;
            let t1 = t0 + 2.0 * PI * turns;
            let mut positions = Vec::with_capacity(n);
            let mut arclength = Vec::with_capacity(n);
            for _ in 0..n {
                let t = rng.random_range(t0..t1);
                let y = rng.random_range(0.0..width);
                let mut q = [t * t.cos(), y, t * t.sin()];
                if noise > 0.0 {
                    for c in &mut q {
                        *c += rng.random_range(-noise..noise);
                    }
                }
                positions.push(q);
                arclength.push(spiral_arclength(t) - spiral_arclength(t0));
            }
            let features = Matrix::from_vec(n, 1, arclength)?;
            PointCloud::with_features(positions, Some(features))?
        }
        SyntheticKind::Cylinder => {
            let (radius, height) = (p["radius"], p["height"]);
            require_positive(kind, "radius", radius)?;
            require_positive(kind, "height", height)?;
            let positions = (0..n)
                .map(|_| {
                    let a = rng.random_range(0.0..2.0 * PI);
                    let h = rng.random_range(0.0..height);
                    [radius * a.cos(), radius * a.sin(), h]
                })
                .collect();
            PointCloud::new(positions)?
        }
    };
    meta.validate_for(&cloud)?;
    Ok((cloud, meta))
}

/// Row-major square-ish lattice in the plane `z = height`, x varying fastest.
fn lattice(
    count: usize,
    spacing: f64,
    height: f64,
    jitter: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Point3> {
    let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
    (0..count)
        .map(|k| {
            let (mut gx, mut gy) = ((k % cols) as f64, (k / cols) as f64);
            if jitter > 0.0 {
                gx += rng.random_range(-jitter..jitter);
                gy += rng.random_range(-jitter..jitter);
            }
            [gx * spacing, gy * spacing, height]
        })
        .collect()
}

/// Arclength of the spiral `r = t` measured from the origin.
fn spiral_arclength(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::dist;

    #[test]
    fn grid_of_four() {
        let (c, _) = gen_synthetic(SyntheticKind::Grid, 4, &SyntheticParams::new(), 0).unwrap();
        assert_eq!(
            c.positions(),
            &[
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [1.0, 1.0, 0.0]
            ]
        );
    }

    #[test]
    fn two_planes_balanced_and_separated() {
        let params = SyntheticParams::from([("gap".to_string(), 0.05)]);
        let (c, meta) = gen_synthetic(SyntheticKind::TwoPlanes, 200, &params, 3).unwrap();
        let tags = meta.ground_truth_part_id.unwrap();
        assert_eq!(tags.iter().filter(|&&t| t == 0).count(), 100);
        assert_eq!(tags.iter().filter(|&&t| t == 1).count(), 100);
        let mut min_cross = f64::INFINITY;
        for i in 0..c.len() {
            for j in 0..c.len() {
                if tags[i] != tags[j] {
                    min_cross = min_cross.min(dist(c.position(i), c.position(j)));
                }
            }
        }
        assert!(
            min_cross >= 0.9 * 0.05,
            "min inter-sheet distance {min_cross}"
        );
    }

    #[test]
    fn swiss_roll_is_deterministic() {
        let p = SyntheticParams::new();
        let (a, _) = gen_synthetic(SyntheticKind::SwissRoll, 500, &p, 7).unwrap();
        let (b, _) = gen_synthetic(SyntheticKind::SwissRoll, 500, &p, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.feature_width(), 1);
        let (c, _) = gen_synthetic(SyntheticKind::SwissRoll, 500, &p, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn arclength_is_increasing_with_angle() {
        assert!(spiral_arclength(5.0) > spiral_arclength(4.0));
        // midpoint quadrature of sqrt(1 + t^2)
        let numeric: f64 = {
            let steps = 100_000;
            let (a, b) = (2.0_f64, 3.0_f64);
            let h = (b - a) / steps as f64;
            (0..steps)
                .map(|k| {
                    let t = a + (k as f64 + 0.5) * h;
                    (1.0 + t * t).sqrt() * h
                })
                .sum()
        };
        assert!((spiral_arclength(3.0) - spiral_arclength(2.0) - numeric).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad_gap = SyntheticParams::from([("gap".to_string(), 0.0)]);
        assert!(gen_synthetic(SyntheticKind::TwoPlanes, 10, &bad_gap, 0).is_err());
        let bad_turns = SyntheticParams::from([("turns".to_string(), 0.5)]);
        assert!(gen_synthetic(SyntheticKind::SwissRoll, 10, &bad_turns, 0).is_err());
        let wrong_key = SyntheticParams::from([("gap".to_string(), 1.0)]);
        assert!(gen_synthetic(SyntheticKind::Cylinder, 10, &wrong_key, 0).is_err());
        assert!(gen_synthetic(SyntheticKind::Grid, 3, &SyntheticParams::new(), 0).is_err());
        assert!("torus".parse::<SyntheticKind>().is_err());
    }
}
