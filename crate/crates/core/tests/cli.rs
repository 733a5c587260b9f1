use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_manifold-geo"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn validate(schema: &str, doc: &Value) {
    let path = repo()
        .join("docs/schemas")
        .join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(
        errors.is_empty(),
        "{} violations: {errors:#?}",
        path.display()
    );
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn graph_on_collinear_points() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.xyz", "0 0 0\n1 0 0\n2 0 0\n");
    let doc = json_of(&run(&["graph", "--input", &f, "--k-graph", "1"]));
    assert_eq!(doc["edges"], serde_json::json!([[0, 1, 1.0], [1, 2, 1.0]]));
    validate("graph", &doc);
}

#[test]
fn graph_errors_map_to_exit_codes() {
    let missing = run(&["graph", "--input", "/nonexistent/cloud.xyz"]);
    assert_eq!(missing.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/cloud.xyz"));

    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.xyz", "0 0 0\n1 0 0\n2 0 0\n");
    let too_big = run(&["graph", "--input", &f, "--k-graph", "3"]);
    assert_eq!(too_big.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&too_big.stderr).contains("k_graph"));

    let bad = write(dir.path(), "bad.xyz", "0 0 0\n1 0\n");
    let parse = run(&["graph", "--input", &bad]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 2"));

    let dup = write(dir.path(), "dup.xyz", "0 0 0\n0 0 0\n1 0 0\n");
    assert_eq!(
        run(&["graph", "--input", &dup, "--k-graph", "1"])
            .status
            .code(),
        Some(2)
    );
}

fn gen_cloud(dir: &Path, kind: &str, n: usize, seed: u64, extra: &[&str]) -> (String, String) {
    let cloud = dir
        .join(format!("{kind}.xyz"))
        .to_str()
        .unwrap()
        .to_string();
    let meta = dir
        .join(format!("{kind}.meta.json"))
        .to_str()
        .unwrap()
        .to_string();
    let (n, seed) = (n.to_string(), seed.to_string());
    let mut args = vec![
        "gen",
        "--kind",
        kind,
        "--n",
        &n,
        "--seed",
        &seed,
        "--out",
        &cloud,
        "--meta-out",
        &meta,
    ];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    (cloud, meta)
}

#[test]
fn geodesic_saturation_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let (cloud, meta) = gen_cloud(dir.path(), "grid", 36, 0, &[]);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(meta).unwrap()).unwrap();
    validate("cloud-meta", &meta);
    let doc = json_of(&run(&[
        "geodesic",
        "--input",
        &cloud,
        "--m-anchors",
        "36",
        "--leg-metric",
        "graph",
        "--s",
        "36",
        "--oracle",
    ]));
    validate("geodesic", &doc);
    let pairs = doc["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 36 * 35 / 2);
    for p in pairs {
        let (a, o) = (p[2].as_f64().unwrap(), p[3].as_f64().unwrap());
        assert!((a - o).abs() < 1e-9, "{p}");
    }
}

#[test]
fn geodesic_bounds_and_self_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let (cloud, _) = gen_cloud(dir.path(), "grid", 25, 0, &["--param", "spacing=0.5"]);
    let text = std::fs::read_to_string(&cloud).unwrap();
    let pts: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    for (metric, m) in [("euclidean", "4"), ("graph", "7")] {
        let doc = json_of(&run(&[
            "geodesic",
            "--input",
            &cloud,
            "--m-anchors",
            m,
            "--leg-metric",
            metric,
        ]));
        validate("geodesic", &doc);
        for p in doc["pairs"].as_array().unwrap() {
            let (i, j) = (
                p[0].as_u64().unwrap() as usize,
                p[1].as_u64().unwrap() as usize,
            );
            let e = ((0..3).map(|k| (pts[i][k] - pts[j][k]).powi(2)).sum::<f64>()).sqrt();
            assert!(p[2].as_f64().unwrap() >= e - 1e-9);
        }
    }
    let doc = json_of(&run(&[
        "geodesic",
        "--input",
        &cloud,
        "--m-anchors",
        "4",
        "--pairs",
        "3:3,0:24",
    ]));
    assert_eq!(doc["pairs"][0][2], 0.0);
    assert_eq!(doc["pairs"].as_array().unwrap().len(), 2);
    assert_eq!(
        run(&[
            "geodesic",
            "--input",
            &cloud,
            "--pairs",
            "0:99",
            "--m-anchors",
            "4"
        ])
        .status
        .code(),
        Some(2)
    );
}

fn pipeline_config(dir: &Path, body: &str) -> String {
    write(dir, "config.json", body)
}

#[test]
fn pipeline_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo().join("docs/examples/two_planes.json");
    let cfg = cfg.to_str().unwrap();
    let a = run(&["pipeline", "--config", cfg]);
    let b = run(&["pipeline", "--config", cfg]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let doc = json_of(&a);
    validate("pipeline-output", &doc);
    assert_eq!(doc["metrics"]["sheet_purity"], 1.0);
    assert!(doc["metrics"]["euclidean_sheet_purity"].as_f64().unwrap() < 1.0);

    let out = dir.path().join("out.json");
    let status = run(&["pipeline", "--config", cfg, "--out", out.to_str().unwrap()]);
    assert!(status.status.success() && status.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);

    for example in ["two_planes.json", "swiss_roll.json"] {
        let text = std::fs::read_to_string(repo().join("docs/examples").join(example)).unwrap();
        validate("pipeline-config", &serde_json::from_str(&text).unwrap());
    }
}

#[test]
fn pipeline_singleton_neighbors_copy_features() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = pipeline_config(
        dir.path(),
        r#"{"input": {"synthetic": {"kind": "swiss_roll", "n": 120, "seed": 5}},
            "anchors": {"m": 16, "leg_metric": "graph"},
            "grouping": {"level_sizes": [30], "k": 1},
            "descriptor_mlp": {"seeded": {"seed": 1}},
            "attention_mlp": {"seeded": {"seed": 2, "scale": 3.0}}}"#,
    );
    let doc = json_of(&run(&["pipeline", "--config", &cfg]));
    validate("pipeline-output", &doc);
    assert_eq!(doc["feature_source"], "cloud");
    let (cloud, _) = manifold_geo::synthetic::gen_synthetic(
        manifold_geo::synthetic::SyntheticKind::SwissRoll,
        120,
        &Default::default(),
        5,
    )
    .unwrap();
    let feats = cloud.features().unwrap();
    let level = &doc["levels"][0];
    for (r, nbrs) in level["neighbor_indices"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
    {
        let j = nbrs[0].as_u64().unwrap() as usize;
        let refined: Vec<f64> = level["refined"][r]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .collect();
        assert_eq!(refined, feats.row(j));
    }
}

#[test]
fn pipeline_reads_files_with_meta_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (cloud, meta) = gen_cloud(dir.path(), "two_planes", 200, 3, &[]);
    let cfg = pipeline_config(
        dir.path(),
        r#"{"k_graph": 4,
            "anchors": {"m": 16, "leg_metric": "graph", "s": 16},
            "grouping": {"level_sizes": [40, 10], "k": 8},
            "descriptor_mlp": {"seeded": {"seed": 1}},
            "attention_mlp": {"seeded": {"seed": 2}}}"#,
    );
    let doc = json_of(&run(&[
        "pipeline", "--config", &cfg, "--input", &cloud, "--meta", &meta,
    ]));
    assert_eq!(doc["metrics"]["sheet_purity"], 1.0);
    assert_eq!(doc["feature_source"], "positions");

    let missing_input = run(&["pipeline", "--config", &cfg]);
    assert_eq!(missing_input.status.code(), Some(2));
}

#[test]
fn pipeline_config_errors_name_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = pipeline_config(
        dir.path(),
        r#"{"input": {"synthetic": {"kind": "grid", "n": 16, "seed": 0}},
            "grouping": {"level_sizes": [4], "k": -1},
            "descriptor_mlp": {"seeded": {"seed": 1}},
            "attention_mlp": {"seeded": {"seed": 2}}}"#,
    );
    let out = run(&["pipeline", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grouping.k"));
    assert_eq!(
        run(&["pipeline", "--config", "/nonexistent.json"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn metrics_hand_values_and_stages() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "p.xyz", "0 0 0\n");
    let q = write(dir.path(), "q.xyz", "0 0 0\n3 0 0\n");
    let doc = json_of(&run(&["metrics", "--pred", &p, "--gt", &q]));
    validate("metrics", &doc);
    assert_eq!(doc["cd_l2"], 4.5);
    assert_eq!(doc["cd_l1"], 0.75);
    assert_eq!(doc["threshold"], 0.01);

    let coarse = write(dir.path(), "coarse.xyz", "1 0 0\n");
    let doc = json_of(&run(&[
        "metrics",
        "--pred",
        &coarse,
        "--gt",
        &p,
        "--stage",
        &q,
        "--threshold",
        "1",
    ]));
    validate("metrics", &doc);
    assert_eq!(doc["total_loss"]["cd_l2"], 6.5);

    assert_eq!(
        run(&["metrics", "--pred", &p, "--gt", &q, "--threshold", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bench_report_is_ordered_and_valid() {
    let out = run(&[
        "bench-anchors",
        "--n",
        "300",
        "--anchor-counts",
        "8,32,300",
        "--trials",
        "3",
        "--queries",
        "64",
    ]);
    let doc = json_of(&out);
    validate("bench-report", &doc);
    let results = doc["results"].as_array().unwrap();
    let err: Vec<f64> = results
        .iter()
        .map(|r| r["mean_abs_rel_error_vs_oracle"].as_f64().unwrap())
        .collect();
    assert!(err.windows(2).all(|w| w[1] <= w[0]), "{err:?}");
    assert!(err[2] < 1e-12);
    assert_eq!(
        results[0]["samples"]["build_ms"].as_array().unwrap().len(),
        3
    );

    let bad = run(&["bench-anchors", "--n", "100", "--anchor-counts", "50,200"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gen_writes_ply_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.ply");
    let b = dir.path().join("b.ply");
    for p in [&a, &b] {
        let out = run(&[
            "gen",
            "--kind",
            "swiss_roll",
            "--n",
            "64",
            "--seed",
            "9",
            "--out",
            p.to_str().unwrap(),
        ]);
        let meta = json_of(&out);
        validate("cloud-meta", &meta);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let cloud = manifold_geo::io::load_cloud(&a, manifold_geo::io::CloudFormat::PlyAscii).unwrap();
    assert_eq!(cloud.len(), 64);
    assert_eq!(cloud.feature_width(), 1);

    let bad = run(&[
        "gen",
        "--kind",
        "grid",
        "--n",
        "16",
        "--param",
        "turns=2",
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn example_files_load() {
    let ex = repo().join("docs/examples");
    let doc = json_of(&run(&[
        "graph",
        "--input",
        ex.join("collinear.xyz").to_str().unwrap(),
        "--k-graph",
        "1",
    ]));
    assert_eq!(doc["n"], 3);
    let doc = json_of(&run(&[
        "graph",
        "--input",
        ex.join("square_features.ply").to_str().unwrap(),
        "--k-graph",
        "2",
    ]));
    assert_eq!(doc["n"], 4);
}

#[test]
fn mlp_params_schema_matches_serializer() {
    let p = manifold_geo::features::MlpParams::seeded(4, 3, 2, 0.5, 1).unwrap();
    validate("mlp-params", &p.to_json());
    let cloud = manifold_geo::synthetic::gen_synthetic(
        manifold_geo::synthetic::SyntheticKind::Grid,
        16,
        &Default::default(),
        0,
    )
    .unwrap()
    .0;
    let graph = manifold_geo::graph::build_knn_graph(&cloud, 3).unwrap();
    let cfg =
        manifold_geo::geodesic::EngineConfig::new(4, manifold_geo::geodesic::LegMetric::Graph);
    let engine = manifold_geo::geodesic::build_engine(&cloud, &graph, &cfg).unwrap();
    validate("engine", &engine.to_json());
}

#[test]
fn schemas_reject_malformed_documents() {
    let load = |name: &str| {
        let path = repo()
            .join("docs/schemas")
            .join(format!("{name}.schema.json"));
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        jsonschema::validator_for(&schema).unwrap()
    };
    let graph = load("graph");
    assert!(!graph.is_valid(&serde_json::json!({"edges": []})));
    assert!(!graph.is_valid(&serde_json::json!({"n": 2, "edges": [[0, 1, -1.0]]})));
    let metrics = load("metrics");
    assert!(!metrics.is_valid(&serde_json::json!({"n_pred": 1, "n_gt": 1, "cd_l1": 0, "cd_l2": 0, "f_score": 2, "threshold": 0.01})));
    let config = load("pipeline-config");
    assert!(!config.is_valid(&serde_json::json!({"grouping": {"level_sizes": [4]}, "descriptor_mlp": {"seeded": {"seed": 1}}})));
}
