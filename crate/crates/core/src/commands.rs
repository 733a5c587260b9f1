//! Subcommand bodies shared by the binary and the integration tests. Every
//! command returns a JSON document; the binary decides where it goes.

use std::collections::btree_map::{BTreeMap, Entry};
use std::path::Path;

use serde_json::{json, Value};

use crate::bench::{bench_anchors, BenchConfig};
use crate::cloud::PointCloud;
use crate::error::{check_index, Error, Result};
use crate::geodesic::{build_engine, dijkstra, EngineConfig};
use crate::graph::build_knn_graph;
use crate::json::{self, num};
use crate::metrics::{evaluate, total_loss, ChamferVariant};

/// Which point pairs `geodesic` reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    /// Every unordered pair `i < j`.
    All,
    List(Vec<(usize, usize)>),
}

impl std::str::FromStr for PairSelection {
    type Err = Error;

    /// `all` or a comma-separated list such as `0:5,3:3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(PairSelection::All);
        }
        let parse = |tok: &str| -> Result<(usize, usize)> {
            let bad = || Error::invalid(format!("pair `{tok}` is not of the form i:j"));
            let (a, b) = tok.split_once(':').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        };
        let pairs = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(parse)
            .collect::<Result<Vec<_>>>()?;
        if pairs.is_empty() {
            return Err(Error::invalid("no pairs given"));
        }
        Ok(PairSelection::List(pairs))
    }
}

pub fn graph_report(cloud: &PointCloud, k_graph: usize) -> Result<Value> {
    Ok(build_knn_graph(cloud, k_graph)?.to_json())
}

pub fn geodesic_report(
    cloud: &PointCloud,
    k_graph: usize,
    config: &EngineConfig,
    pairs: &PairSelection,
    oracle: bool,
) -> Result<Value> {
    let n = cloud.len();
    let graph = build_knn_graph(cloud, k_graph)?;
    let engine = build_engine(cloud, &graph, config)?;
    let pairs: Vec<(usize, usize)> = match pairs {
        PairSelection::All => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        PairSelection::List(list) => {
            for &(i, j) in list {
                check_index(i, n)?;
                check_index(j, n)?;
            }
            list.clone()
        }
    };

    let mut approx_rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut oracle_rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut out = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let approx = match approx_rows.entry(i) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => e.insert(engine.approx_row(i)?),
        };
        let mut entry = vec![json!(i), json!(j), num(approx[j])];
        if oracle {
            let exact = match oracle_rows.entry(i) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(dijkstra(&graph, i)?),
            };
            entry.push(num(exact[j]));
        }
        out.push(Value::Array(entry));
    }
    Ok(json!({
        "n_points": n,
        "k_graph": k_graph,
        "engine": engine.to_json(),
        "oracle": oracle,
        "pairs": out,
    }))
}

/// Metrics of `pred` against `gt`, plus the multi-stage loss when `stages`
/// are given (with `pred` as the coarse output).
pub fn metrics_report(
    pred: &PointCloud,
    gt: &PointCloud,
    stages: &[PointCloud],
    threshold: f64,
) -> Result<Value> {
    let report = evaluate(pred, gt, threshold)?;
    let mut doc = json!({
        "n_pred": pred.len(),
        "n_gt": gt.len(),
        "cd_l1": num(report.cd_l1),
        "cd_l2": num(report.cd_l2),
        "f_score": num(report.f_score),
        "threshold": num(report.threshold),
    });
    if !stages.is_empty() {
        doc["total_loss"] = json!({
            "stages": stages.len(),
            "cd_l1": num(total_loss(pred, stages, gt, ChamferVariant::L1)),
            "cd_l2": num(total_loss(pred, stages, gt, ChamferVariant::L2)),
        });
    }
    Ok(doc)
}

pub fn bench_report(config: &BenchConfig) -> Result<Value> {
    Ok(bench_anchors(config)?.to_json())
}

/// Writes `value` as pretty JSON to `out`, or to stdout when `out` is `None`.
pub fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = json::to_string_pretty(value);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
