//! End-to-end feature pipeline driven by a JSON config: proximity graph,
//! geodesic engine, hierarchical grouping, relational attention per level and
//! anchor positional embedding of the refined features.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use crate::cloud::{CloudMeta, PointCloud};
use crate::error::{Error, Result};
use crate::features::{
    attend_level, euclidean_knn, gng_build, mpe_augment, sheet_purity, GroupingConfig, MlpParams,
    NeighborPool,
};
use crate::geodesic::{build_engine, EngineConfig};
use crate::graph::{build_knn_graph, DEFAULT_K_GRAPH};
use crate::io::{load_cloud, CloudFormat};
use crate::json::{self, num};
use crate::metrics::{evaluate, DEFAULT_F_THRESHOLD};
use crate::synthetic::{gen_synthetic, SyntheticKind, SyntheticParams};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSource {
    File {
        path: PathBuf,
        #[serde(default)]
        format: Option<CloudFormat>,
        /// Sidecar written by `gen --meta-out`, carrying part ids.
        #[serde(default)]
        meta: Option<PathBuf>,
    },
    Synthetic {
        kind: SyntheticKind,
        n: usize,
        seed: u64,
        #[serde(default)]
        params: SyntheticParams,
    },
}

/// Where MLP weights come from: explicit arrays or a seeded uniform draw.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MlpSource {
    Explicit(MlpParams),
    Seeded {
        seed: u64,
        #[serde(default)]
        hidden: Option<usize>,
        #[serde(default)]
        output: Option<usize>,
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

fn default_scale() -> f64 {
    0.5
}

impl MlpSource {
    /// Resolves to parameters with the given input width. `fixed_output`
    /// pins the output width (attention must reproduce C channels).
    fn resolve(
        &self,
        input: usize,
        fixed_output: Option<usize>,
        default_output: usize,
        field: &str,
    ) -> Result<MlpParams> {
        let params = match self {
            MlpSource::Explicit(p) => p.clone(),
            MlpSource::Seeded {
                seed,
                hidden,
                output,
                scale,
            } => {
                let out = output.or(fixed_output).unwrap_or(default_output);
                let hidden = hidden.unwrap_or(2 * out);
                MlpParams::seeded(input, hidden, out, *scale, *seed)?
            }
        };
        if params.input_width() != input {
            return Err(Error::Config {
                path: field.into(),
                message: format!(
                    "input width {} but the pipeline feeds {input}",
                    params.input_width()
                ),
            });
        }
        if let Some(out) = fixed_output {
            if params.output_width() != out {
                return Err(Error::Config {
                    path: field.into(),
                    message: format!(
                        "output width {} but must equal {out}",
                        params.output_width()
                    ),
                });
            }
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub input: Option<InputSource>,
    #[serde(default = "default_k_graph")]
    pub k_graph: usize,
    #[serde(default)]
    pub anchors: EngineConfig,
    pub grouping: GroupingConfig,
    pub descriptor_mlp: MlpSource,
    pub attention_mlp: MlpSource,
    #[serde(default = "default_threshold")]
    pub f_threshold: f64,
}

fn default_k_graph() -> usize {
    DEFAULT_K_GRAPH
}

fn default_threshold() -> f64 {
    DEFAULT_F_THRESHOLD
}

impl PipelineConfig {
    /// Parses a config document, reporting failures with their field path.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::Config {
                path,
                message: e.into_inner().to_string(),
            }
        })
    }

    /// Loads or generates the cloud named by `input`.
    pub fn load_input(&self) -> Result<(PointCloud, CloudMeta)> {
        match &self.input {
            None => Err(Error::Config {
                path: "input".into(),
                message: "no input cloud given in the config or on the command line".into(),
            }),
            Some(InputSource::File { path, format, meta }) => {
                let format = format.unwrap_or_else(|| CloudFormat::from_path(path));
                let cloud = load_cloud(path, format)?;
                let meta = match meta {
                    Some(meta_path) => load_meta(meta_path)?,
                    None => CloudMeta::named(path.display().to_string()),
                };
                meta.validate_for(&cloud)?;
                Ok((cloud, meta))
            }
            Some(InputSource::Synthetic {
                kind,
                n,
                seed,
                params,
            }) => gen_synthetic(*kind, *n, params, *seed),
        }
    }
}

pub fn load_meta(path: &Path) -> Result<CloudMeta> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.into_inner().to_string(),
    })
}

pub fn run_pipeline(
    cloud: &PointCloud,
    meta: &CloudMeta,
    config: &PipelineConfig,
) -> Result<Value> {
    meta.validate_for(cloud)?;
    let features = cloud.features_or_positions();
    let width = features.cols();
    let descriptor = config
        .descriptor_mlp
        .resolve(width + 4, None, 2 * width, "descriptor_mlp")?;
    let attention = config
        .attention_mlp
        .resolve(width + 1, Some(width), width, "attention_mlp")?;

    let graph = build_knn_graph(cloud, config.k_graph)?;
    let engine = build_engine(cloud, &graph, &config.anchors)?;
    let levels = gng_build(cloud, &engine, &config.grouping, &descriptor)?;

    let tags = meta.ground_truth_part_id.as_deref();
    let mut level_docs = Vec::with_capacity(levels.len());
    let mut level_metrics = Vec::with_capacity(levels.len());
    let (mut geo_same, mut euc_same, mut pairs) = (0.0, 0.0, 0usize);
    for level in &levels {
        let attended = attend_level(&features, level, &attention)?;
        let augmented = mpe_augment(&attended.refined, &engine, &level.center_indices)?;

        let mut doc = level.to_json();
        doc["refined"] = json::matrix(&attended.refined);
        doc["augmented"] = json::matrix(&augmented);
        level_docs.push(doc);

        let (geo, euc) = match tags {
            Some(tags) => {
                let pool = match config.grouping.pool {
                    NeighborPool::FullCloud => None,
                    NeighborPool::Level => Some(level.center_indices.as_slice()),
                };
                let euclid = level
                    .center_indices
                    .iter()
                    .map(|&c| {
                        euclidean_knn(cloud.positions(), c, config.grouping.k, pool)
                            .map(|h| h.indices)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let geo = sheet_purity(&level.center_indices, &level.neighbor_indices, tags);
                let euc = sheet_purity(&level.center_indices, &euclid, tags);
                let count = level.len() * config.grouping.k;
                geo_same += geo * count as f64;
                euc_same += euc * count as f64;
                pairs += count;
                (num(geo), num(euc))
            }
            None => (Value::Null, Value::Null),
        };
        let centers = cloud.subset(&level.center_indices)?;
        let coverage = evaluate(&centers, cloud, config.f_threshold)?;
        level_metrics.push(json!({
            "centers": level.len(),
            "sheet_purity": geo,
            "euclidean_sheet_purity": euc,
            "coverage": serde_json::to_value(coverage).expect("finite metrics"),
        }));
    }

    let overall = |same: f64| {
        if pairs > 0 {
            num(same / pairs as f64)
        } else {
            Value::Null
        }
    };
    Ok(json!({
        "name": meta.name,
        "n_points": cloud.len(),
        "feature_source": if cloud.features().is_some() { "cloud" } else { "positions" },
        "feature_width": width,
        "normalization": "none",
        "graph": {
            "k_graph": config.k_graph,
            "edge_count": graph.edge_count(),
            "components": graph.component_count(),
        },
        "engine": engine.to_json(),
        "levels": level_docs,
        "metrics": {
            "sheet_purity": overall(geo_same),
            "euclidean_sheet_purity": overall(euc_same),
            "levels": level_metrics,
        },
    }))
}
