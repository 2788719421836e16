use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nscluster::cli::RunSummary;
use nscluster::dataset::{load_csv, ColumnRef};

fn nscluster(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nscluster"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn uci(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/uci")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn read_summary(path: PathBuf) -> RunSummary {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn x13_verdict_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(dir.path(), &["cluster", "--gen", "x13", "--k", "2", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_path(dir.path().join("x13_memberships.csv")).unwrap();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let verdicts: Vec<&str> = records.iter().map(|r| &r[r.len() - 1]).collect();
    assert_eq!(verdicts.len(), 13);
    assert_eq!(verdicts.iter().filter(|v| **v == "outlier").count(), 4);
    assert_eq!(verdicts.iter().filter(|v| v.starts_with("boundary")).count(), 1);
}

#[test]
fn csv_matches_summary_to_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    nscluster(dir.path(), &["cluster", "--gen", "x37"]);
    let summary = read_summary(dir.path().join("x37_summary.json"));
    assert_eq!(summary.points.len(), 37);
    assert_eq!(summary.verdict_counts.boundary, 6);
    let table = load_csv(
        &dir.path().join("x37_memberships.csv"),
        Some(&ColumnRef::from("verdict")),
        true,
    )
    .unwrap();
    for (row, p) in table.points().rows().into_iter().zip(&summary.points) {
        let expected: Vec<f64> = p.t.iter().copied().chain([p.f, p.d]).collect();
        for (a, b) in row.iter().skip(1).zip(&expected) {
            assert!((a - b).abs() <= 5e-7, "{a} vs {b}");
        }
    }
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(dir.path(), &["cluster", "missing.csv", "--k", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        nscluster(dir.path(), &["cluster", "--gen", "x99"]).status.code(),
        Some(1)
    );
    assert_eq!(
        nscluster(
            dir.path(),
            &["cluster", "--gen", "x13", "--eps", "0.1", "--eps-quantile", "0.2"]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        nscluster(dir.path(), &["cluster", "--gen", "x13", "--fuzzifier", "1"])
            .status
            .code(),
        Some(1)
    );
    let out = nscluster(dir.path(), &["cluster", &uci("haberman.csv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));
}

#[test]
fn iteration_limit_exits_three_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(dir.path(), &["cluster", "--gen", "x13", "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!read_summary(dir.path().join("x13_summary.json")).converged);
}

#[test]
fn file_input_with_label_and_normalization() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(
        dir.path(),
        &[
            "cluster",
            &uci("haberman.csv"),
            "--k",
            "2",
            "--label-col",
            "class",
            "--normalize",
            "zscore",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_summary(dir.path().join("haberman_summary.json"));
    assert_eq!((s.dataset.n, s.dataset.dim), (306, 3));
    assert!(s.wall_time_ms.is_none());
}

#[test]
fn config_file_values_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "k = 3\nseed = 9\nalpha = 0.9\nout_dir = \"res\"\n",
    )
    .unwrap();
    let out = nscluster(
        dir.path(),
        &["cluster", "--gen", "x13", "--config", "run.toml", "--seed", "2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_summary(dir.path().join("res/x13_summary.json"));
    assert_eq!(s.config.k, 3);
    assert_eq!(s.config.seed, 2);
    assert_eq!(s.config.certainty.alpha, 0.9);
}

#[test]
fn eval_writes_per_seed_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(
        dir.path(),
        &[
            "eval",
            &uci("heart.csv"),
            "--k",
            "2",
            "--label-col",
            "num",
            "--binarize-labels",
            "--seeds",
            "10",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("heart_comparison.json")).unwrap()).unwrap();
    assert_eq!(v["proposed"]["per_seed"].as_array().unwrap().len(), 10);
    assert_eq!(v["fcm"]["per_seed"].as_array().unwrap().len(), 10);
    assert_eq!(v["n"], 297);
}

#[test]
fn eval_glass_six_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(
        dir.path(),
        &[
            "eval",
            &uci("glass.csv"),
            "--k",
            "6",
            "--label-col",
            "type",
            "--seeds",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("glass_comparison.json")).unwrap()).unwrap();
    assert_eq!(v["k"], 6);
}

#[test]
fn eval_without_labels_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(dir.path(), &["eval", &uci("haberman.csv")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("label column required"));
}

#[test]
fn plot_scatter_and_bars() {
    let dir = tempfile::tempdir().unwrap();
    nscluster(dir.path(), &["cluster", "--gen", "x13"]);
    let out = nscluster(dir.path(), &["plot", "x13_summary.json", "--out", "x13.svg"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("x13.svg")).unwrap();
    assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches(r#"data-verdict="outlier""#).count(), 4);
    assert_eq!(
        svg.matches(r#"data-verdict="boundary(1,2)""#).count() + svg.matches(r#"data-verdict="boundary(2,1)""#).count(),
        1
    );
    assert_eq!(svg.matches(r#"class="centroid""#).count(), 2);
    for colour in ["#1f77b4", "#ff7f0e"] {
        assert!(svg.contains(colour));
    }
}

#[test]
fn plot_needs_two_dimensions_for_scatter() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("d3.csv"),
        "a,b,c\n0,0,0\n0,0.1,0\n1,1,1\n1,0.9,1\n0.5,0.5,0.4\n",
    )
    .unwrap();
    let out = nscluster(dir.path(), &["cluster", "d3.csv", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = nscluster(dir.path(), &["plot", "d3_summary.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimensions"));
    let out = nscluster(dir.path(), &["plot", "d3_summary.json", "--bars-only"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(dir.path().join("d3_summary.svg"))
        .unwrap()
        .contains("</svg>"));
}

#[test]
fn gen_writes_labelled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = nscluster(dir.path(), &["gen", "x43", "--out", "data/x43.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let ds = load_csv(&dir.path().join("data/x43.csv"), Some(&ColumnRef::from("group")), true).unwrap();
    assert_eq!((ds.n(), ds.dim()), (43, 2));
}
