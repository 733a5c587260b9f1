use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifold_geo::bench::BenchConfig;
use manifold_geo::cloud::PointCloud;
use manifold_geo::commands::{self, PairSelection};
use manifold_geo::error::{Error, Result};
use manifold_geo::geodesic::{EngineConfig, LegMetric, DEFAULT_ANCHORS};
use manifold_geo::graph::DEFAULT_K_GRAPH;
use manifold_geo::io::{load_cloud, save_cloud, CloudFormat};
use manifold_geo::metrics::DEFAULT_F_THRESHOLD;
use manifold_geo::pipeline::{run_pipeline, InputSource, PipelineConfig};
use manifold_geo::synthetic::{gen_synthetic, SyntheticKind, SyntheticParams};

/// Geodesic tooling for point clouds: proximity graphs, anchor-based
/// geodesic distances, grouping and attention features, and metrics.
#[derive(Parser)]
#[command(name = "manifold-geo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the k-NN proximity graph of a cloud.
    Graph {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_K_GRAPH)]
        k_graph: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Approximate geodesic distances through anchors.
    Geodesic {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_K_GRAPH)]
        k_graph: usize,
        #[arg(long, default_value_t = DEFAULT_ANCHORS)]
        m_anchors: usize,
        #[arg(long, default_value = "euclidean")]
        leg_metric: LegMetric,
        /// Candidate anchors per endpoint; defaults to min(8, M).
        #[arg(long)]
        s: Option<usize>,
        #[arg(long, default_value_t = 0)]
        fps_seed: usize,
        /// `all` or a list like `0:5,3:7`.
        #[arg(long, default_value = "all")]
        pairs: PairSelection,
        /// Append the exact graph distance to each pair.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run grouping, attention and positional embedding from a JSON config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's input with this cloud file.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        format: Option<CloudFormat>,
        /// Part-id sidecar for `--input`.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Chamfer distances and F-score of a prediction against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_F_THRESHOLD)]
        threshold: f64,
        /// Refinement stage outputs; `--pred` is then the coarse output.
        #[arg(long)]
        stage: Vec<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Time engine build and queries across anchor counts.
    BenchAnchors {
        #[arg(long, default_value_t = 2048)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![64, 128, 256, 2048])]
        anchor_counts: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 256)]
        queries: usize,
        #[arg(long, default_value_t = DEFAULT_K_GRAPH)]
        k_graph: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Build engines with parallel Dijkstra sweeps.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Generate a synthetic cloud.
    Gen {
        #[arg(long)]
        kind: SyntheticKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Generator parameter override, `name=value`; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        /// Cloud file to write; format follows the extension.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        format: Option<CloudFormat>,
        /// Where to write name and part ids as JSON; stdout when omitted.
        #[arg(long)]
        meta_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults from the file extension.
    #[arg(long)]
    format: Option<CloudFormat>,
}

impl InputArgs {
    fn load(&self) -> Result<PointCloud> {
        load_path(&self.input, self.format)
    }
}

#[derive(Args)]
struct OutArgs {
    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_path(path: &Path, format: Option<CloudFormat>) -> Result<PointCloud> {
    load_cloud(path, format.unwrap_or_else(|| CloudFormat::from_path(path)))
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not name=value"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph {
            input,
            k_graph,
            out,
        } => commands::emit(
            &commands::graph_report(&input.load()?, k_graph)?,
            out.out.as_deref(),
        ),
        Command::Geodesic {
            input,
            k_graph,
            m_anchors,
            leg_metric,
            s,
            fps_seed,
            pairs,
            oracle,
            out,
        } => {
            let mut config = EngineConfig::new(m_anchors, leg_metric).with_fps_seed(fps_seed);
            config.s = s;
            let doc = commands::geodesic_report(&input.load()?, k_graph, &config, &pairs, oracle)?;
            commands::emit(&doc, out.out.as_deref())
        }
        Command::Pipeline {
            config,
            input,
            format,
            meta,
            out,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut cfg = PipelineConfig::from_json_str(&text)?;
            if let Some(path) = input {
                cfg.input = Some(InputSource::File { path, format, meta });
            }
            let (cloud, meta) = cfg.load_input()?;
            commands::emit(&run_pipeline(&cloud, &meta, &cfg)?, out.out.as_deref())
        }
        Command::Metrics {
            pred,
            gt,
            threshold,
            stage,
            out,
        } => {
            let pred = load_path(&pred, None)?;
            let gt = load_path(&gt, None)?;
            let stages = stage
                .iter()
                .map(|p| load_path(p, None))
                .collect::<Result<Vec<_>>>()?;
            commands::emit(
                &commands::metrics_report(&pred, &gt, &stages, threshold)?,
                out.out.as_deref(),
            )
        }
        Command::BenchAnchors {
            n,
            anchor_counts,
            trials,
            queries,
            k_graph,
            seed,
            parallel,
            out,
        } => {
            let cfg = BenchConfig {
                n,
                anchor_counts,
                trials,
                queries,
                k_graph,
                seed,
                parallel,
            };
            commands::emit(&commands::bench_report(&cfg)?, out.out.as_deref())
        }
        Command::Gen {
            kind,
            n,
            seed,
            params,
            out,
            format,
            meta_out,
        } => {
            let params: SyntheticParams = params.into_iter().collect();
            let (cloud, meta) = gen_synthetic(kind, n, &params, seed)?;
            save_cloud(
                &cloud,
                &out,
                format.unwrap_or_else(|| CloudFormat::from_path(&out)),
            )?;
            let value = serde_json::to_value(&meta).expect("meta serializes");
            commands::emit(&value, meta_out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
