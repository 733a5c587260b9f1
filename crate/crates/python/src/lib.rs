//! Python bindings. Arrays cross the boundary as nested lists of floats.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use manifold_geo::cloud::PointCloud as CorePointCloud;
use manifold_geo::error::Error;
use manifold_geo::features::{self, MlpParams as CoreMlp};
use manifold_geo::geodesic::{
    self, EngineConfig, GeodesicEngine as CoreEngine, LegMetric, DEFAULT_ANCHORS,
};
use manifold_geo::graph::{self, ProximityGraph as CoreGraph, DEFAULT_K_GRAPH};
use manifold_geo::io::{self, CloudFormat};
use manifold_geo::json;
use manifold_geo::matrix::Matrix;
use manifold_geo::metrics::{self, ChamferVariant, DEFAULT_F_THRESHOLD};
use manifold_geo::pipeline::{run_pipeline, PipelineConfig};
use manifold_geo::sampling;
use manifold_geo::synthetic::{self, SyntheticParams};

fn py_err(e: Error) -> PyErr {
    match e.exit_code() {
        3 => PyOSError::new_err(e.to_string()),
        4 => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for manifold_geo::error::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().or_py()
}

type Rows = Vec<Vec<f64>>;

fn to_matrix(rows: &[Vec<f64>], cols_if_empty: usize) -> PyResult<Matrix> {
    let cols = rows.first().map_or(cols_if_empty, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Matrix::from_vec(rows.len(), cols, rows.concat()).or_py()
}

/// N points in 3-space with optional per-point feature rows.
#[pyclass(name = "PointCloud", module = "pymanifold", frozen, from_py_object)]
#[derive(Clone)]
struct PyPointCloud {
    inner: CorePointCloud,
}

#[pymethods]
impl PyPointCloud {
    #[new]
    #[pyo3(signature = (positions, features=None))]
    fn new(positions: Vec<[f64; 3]>, features: Option<Vec<Vec<f64>>>) -> PyResult<Self> {
        let features = features.map(|f| to_matrix(&f, 0)).transpose()?;
        Ok(PyPointCloud {
            inner: CorePointCloud::with_features(positions, features).or_py()?,
        })
    }

    /// Loads `.xyz` or ASCII `.ply`; the format follows the extension unless given.
    #[staticmethod]
    #[pyo3(signature = (path, format=None))]
    fn load(path: PathBuf, format: Option<&str>) -> PyResult<Self> {
        let format = match format {
            Some(f) => parse(f)?,
            None => CloudFormat::from_path(&path),
        };
        Ok(PyPointCloud {
            inner: io::load_cloud(&path, format).or_py()?,
        })
    }

    #[pyo3(signature = (path, format=None))]
    fn save(&self, path: PathBuf, format: Option<&str>) -> PyResult<()> {
        let format = match format {
            Some(f) => parse(f)?,
            None => CloudFormat::from_path(&path),
        };
        io::save_cloud(&self.inner, &path, format).or_py()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn positions(&self) -> Vec<[f64; 3]> {
        self.inner.positions().to_vec()
    }

    #[getter]
    fn features(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.features().map(Matrix::to_rows)
    }

    #[getter]
    fn feature_width(&self) -> usize {
        self.inner.feature_width()
    }

    fn subset(&self, indices: Vec<usize>) -> PyResult<Self> {
        Ok(PyPointCloud {
            inner: self.inner.subset(&indices).or_py()?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "PointCloud(n={}, feature_width={})",
            self.inner.len(),
            self.inner.feature_width()
        )
    }
}

/// Symmetric k-NN proximity graph with Euclidean edge weights.
#[pyclass(name = "ProximityGraph", module = "pymanifold", frozen)]
struct PyGraph {
    inner: CoreGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (cloud, k_graph=DEFAULT_K_GRAPH))]
    fn new(cloud: &PyPointCloud, k_graph: usize) -> PyResult<Self> {
        Ok(PyGraph {
            inner: graph::build_knn_graph(&cloud.inner, k_graph).or_py()?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// `(i, j, weight)` with `i < j`, sorted.
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<(usize, f64)>> {
        if v >= self.inner.n() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    fn component_count(&self) -> usize {
        self.inner.component_count()
    }

    /// Exact shortest-path distances from `source`; `inf` where unreachable.
    fn dijkstra(&self, source: usize) -> PyResult<Vec<f64>> {
        geodesic::dijkstra(&self.inner, source).or_py()
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }
}

/// Anchor-based approximate geodesic distances over a cloud and its graph.
#[pyclass(name = "GeodesicEngine", module = "pymanifold", frozen)]
struct PyEngine {
    inner: CoreEngine,
}

#[pymethods]
impl PyEngine {
    /// `s=None` means `min(8, m_anchors)` candidate anchors per endpoint.
    #[new]
    #[pyo3(signature = (cloud, graph, m_anchors=DEFAULT_ANCHORS, leg_metric="euclidean", s=None, fps_seed=0))]
    fn new(
        py: Python<'_>,
        cloud: &PyPointCloud,
        graph: &PyGraph,
        m_anchors: usize,
        leg_metric: &str,
        s: Option<usize>,
        fps_seed: usize,
    ) -> PyResult<Self> {
        let mut config =
            EngineConfig::new(m_anchors, parse::<LegMetric>(leg_metric)?).with_fps_seed(fps_seed);
        config.s = s;
        let inner = py
            .detach(|| geodesic::build_engine(&cloud.inner, &graph.inner, &config))
            .or_py()?;
        Ok(PyEngine { inner })
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    #[getter]
    fn anchor_indices(&self) -> Vec<usize> {
        self.inner.anchors().anchor_indices.clone()
    }

    #[getter]
    fn anchor_matrix(&self) -> Vec<Vec<f64>> {
        self.inner.anchors().anchor_matrix.to_rows()
    }

    #[getter]
    fn candidate_count(&self) -> usize {
        self.inner.candidate_count()
    }

    fn approx_geodesic(&self, i: usize, j: usize) -> PyResult<f64> {
        self.inner.approx_geodesic(i, j).or_py()
    }

    fn approx_row(&self, i: usize) -> PyResult<Vec<f64>> {
        self.inner.approx_row(i).or_py()
    }

    fn approx_matrix(&self, py: Python<'_>) -> Vec<Vec<f64>> {
        py.detach(|| self.inner.approx_matrix().to_rows())
    }

    fn anchor_distance_vector(&self, i: usize) -> PyResult<Vec<f64>> {
        self.inner.anchor_distance_vector(i).or_py()
    }

    /// `(indices, distances)` of the `k` geodesically nearest points.
    #[pyo3(signature = (center, k, pool=None))]
    fn knn(
        &self,
        center: usize,
        k: usize,
        pool: Option<Vec<usize>>,
    ) -> PyResult<(Vec<usize>, Vec<f64>)> {
        let hood = features::geodesic_knn(&self.inner, center, k, pool.as_deref()).or_py()?;
        Ok((hood.indices, hood.distances))
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }
}

/// One-hidden-layer ReLU perceptron weights.
#[pyclass(name = "MlpParams", module = "pymanifold", frozen)]
struct PyMlp {
    inner: CoreMlp,
}

#[pymethods]
impl PyMlp {
    #[new]
    fn new(w1: Vec<Vec<f64>>, b1: Vec<f64>, w2: Vec<Vec<f64>>, b2: Vec<f64>) -> PyResult<Self> {
        Ok(PyMlp {
            inner: CoreMlp::from_rows(&w1, b1, &w2, b2).or_py()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (input, hidden, output, scale=0.5, seed=0))]
    fn seeded(input: usize, hidden: usize, output: usize, scale: f64, seed: u64) -> PyResult<Self> {
        Ok(PyMlp {
            inner: CoreMlp::seeded(input, hidden, output, scale, seed).or_py()?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyMlp {
            inner: CoreMlp::from_json(&value).or_py()?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json().to_string()
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward(&x).or_py()
    }

    #[getter]
    fn widths(&self) -> (usize, usize, usize) {
        (
            self.inner.input_width(),
            self.inner.hidden_width(),
            self.inner.output_width(),
        )
    }
}

/// Farthest point sampling: `(indices, min_dists)`.
#[pyfunction]
#[pyo3(signature = (cloud, m, seed_index=0))]
fn fps(cloud: &PyPointCloud, m: usize, seed_index: usize) -> PyResult<(Vec<usize>, Vec<f64>)> {
    let r = sampling::fps(&cloud.inner, m, seed_index).or_py()?;
    Ok((r.indices, r.min_dists))
}

/// Synthetic cloud plus its part ids (`None` for single-part shapes).
#[pyfunction]
#[pyo3(signature = (kind, n, seed=0, params=None))]
fn gen_synthetic(
    kind: &str,
    n: usize,
    seed: u64,
    params: Option<std::collections::BTreeMap<String, f64>>,
) -> PyResult<(PyPointCloud, Option<Vec<i64>>)> {
    let params: SyntheticParams = params.unwrap_or_default();
    let (cloud, meta) = synthetic::gen_synthetic(parse(kind)?, n, &params, seed).or_py()?;
    Ok((PyPointCloud { inner: cloud }, meta.ground_truth_part_id))
}

/// Geodesic relational attention: `(refined rows, per-center k x C weights)`.
#[pyfunction]
fn gra_t_forward(
    features: Vec<Vec<f64>>,
    centers: Vec<usize>,
    neighbor_indices: Vec<Vec<usize>>,
    neighbor_geodesics: Vec<Vec<f64>>,
    params: &PyMlp,
) -> PyResult<(Rows, Vec<Rows>)> {
    let features = to_matrix(&features, 0)?;
    let out = features::gra_t_forward(
        &features,
        &centers,
        &neighbor_indices,
        &neighbor_geodesics,
        &params.inner,
    )
    .or_py()?;
    Ok((
        out.refined.to_rows(),
        out.weights.iter().map(Matrix::to_rows).collect(),
    ))
}

/// Appends each point's anchor distance vector to its feature row.
#[pyfunction]
fn mpe_augment(
    features: Vec<Vec<f64>>,
    engine: &PyEngine,
    point_indices: Vec<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    let features = to_matrix(&features, 0)?;
    Ok(
        features::mpe_augment(&features, &engine.inner, &point_indices)
            .or_py()?
            .to_rows(),
    )
}

#[pyfunction]
#[pyo3(signature = (p, q, variant="l2"))]
fn chamfer(p: &PyPointCloud, q: &PyPointCloud, variant: &str) -> PyResult<f64> {
    Ok(metrics::chamfer(
        &p.inner,
        &q.inner,
        parse::<ChamferVariant>(variant)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (p, q, threshold=DEFAULT_F_THRESHOLD))]
fn f_score(p: &PyPointCloud, q: &PyPointCloud, threshold: f64) -> PyResult<f64> {
    metrics::f_score(&p.inner, &q.inner, threshold).or_py()
}

/// `{cd_l1, cd_l2, f_score, threshold}` as a dict.
#[pyfunction]
#[pyo3(signature = (pred, gt, threshold=DEFAULT_F_THRESHOLD))]
fn evaluate(
    pred: &PyPointCloud,
    gt: &PyPointCloud,
    threshold: f64,
) -> PyResult<std::collections::BTreeMap<&'static str, f64>> {
    let r = metrics::evaluate(&pred.inner, &gt.inner, threshold).or_py()?;
    Ok([
        ("cd_l1", r.cd_l1),
        ("cd_l2", r.cd_l2),
        ("f_score", r.f_score),
        ("threshold", r.threshold),
    ]
    .into())
}

#[pyfunction]
#[pyo3(signature = (coarse, stages, gt, variant="l2"))]
fn total_loss(
    coarse: &PyPointCloud,
    stages: Vec<PyPointCloud>,
    gt: &PyPointCloud,
    variant: &str,
) -> PyResult<f64> {
    let stages: Vec<CorePointCloud> = stages.into_iter().map(|s| s.inner).collect();
    Ok(metrics::total_loss(
        &coarse.inner,
        &stages,
        &gt.inner,
        parse(variant)?,
    ))
}

/// Runs the pipeline from a JSON config string and returns the JSON report.
#[pyfunction]
fn pipeline(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let config = PipelineConfig::from_json_str(config_json).or_py()?;
    let doc = py.detach(|| {
        let (cloud, meta) = config.load_input()?;
        run_pipeline(&cloud, &meta, &config)
    });
    Ok(json::to_string_pretty(&doc.or_py()?))
}

#[pymodule]
fn pymanifold(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPointCloud>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyEngine>()?;
    m.add_class::<PyMlp>()?;
    m.add_function(wrap_pyfunction!(fps, m)?)?;
    m.add_function(wrap_pyfunction!(gen_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(gra_t_forward, m)?)?;
    m.add_function(wrap_pyfunction!(mpe_augment, m)?)?;
    m.add_function(wrap_pyfunction!(chamfer, m)?)?;
    m.add_function(wrap_pyfunction!(f_score, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(total_loss, m)?)?;
    m.add_function(wrap_pyfunction!(pipeline, m)?)?;
    Ok(())
}
