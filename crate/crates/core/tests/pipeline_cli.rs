use std::fs;
use std::path::Path;

use clamslice::pipeline::cli::{run, EXIT_ASSERTION, EXIT_FAILURE, EXIT_OK};
use clamslice::pipeline::{run_pipeline, PipelineConfig, REPORT_FORMAT};

const SMALL: &str = r#"
seed = 3

[domain]
fixture = "ball"
radius = 1.0

[field]
source = "synth"
n = 24

[base_points]
count = 4

[chart]
pairs = 2000

[slicing]
n_s = 16
"#;

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("clamslice").chain(args.iter().copied()))
}

fn write_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    fs::write(&p, SMALL).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn clam_check_reports_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    assert_eq!(cli(&["clam", "check", "--order", "1", "--out", &out]), EXIT_OK);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("clam_check.json")).unwrap()).unwrap();
    assert_eq!(report["all_pass"], true);
    assert!(report["volumes"].is_object());
}

#[test]
fn ledger_with_unit_eps0_fails_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    assert_eq!(cli(&["ledger", "check", "--eps0", "1", "--format", "csv", "--out", &out]), EXIT_ASSERTION);
    let table = fs::read_to_string(dir.path().join("ledger_check.csv")).unwrap();
    let failing: Vec<&str> = table.lines().filter(|l| l.ends_with(",false")).map(|l| &l[..l.find(',').unwrap()]).collect();
    assert_eq!(failing, ["i", "ii", "v"]);
    assert_eq!(cli(&["ledger", "check"]), EXIT_OK);
}

#[test]
fn usage_and_io_errors_exit_one() {
    assert_eq!(cli(&["nonsense"]), EXIT_FAILURE);
    assert_eq!(cli(&["clam"]), EXIT_FAILURE);
    assert_eq!(cli(&["field", "info", "/no/such/field.stf"]), EXIT_FAILURE);
    assert_eq!(cli(&["pipeline", "run"]), EXIT_FAILURE);
    assert_eq!(cli(&["pipeline", "run", "--config", "/no/such/config.toml"]), EXIT_FAILURE);
}

#[test]
fn field_synth_info_and_slices() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    assert_eq!(cli(&["field", "synth", "--seed", "5", "--out", &out]), EXIT_OK);
    let field = dir.path().join("field.stf").to_string_lossy().into_owned();
    assert_eq!(cli(&["field", "info", &field]), EXIT_OK);
    assert_eq!(cli(&["slice", "spatial", &field, "--n-s", "8", "--format", "csv", "--out", &out]), EXIT_OK);
    let curve = fs::read_to_string(dir.path().join("slice_spatial.csv")).unwrap();
    assert_eq!(curve.lines().count(), 9);
    assert_eq!(cli(&["slice", "temporal", &field]), EXIT_OK);
}

#[test]
fn chart_verify_on_unit_ball() {
    assert_eq!(cli(&["chart", "verify", "--base", "0,1,0", "--pairs", "2000"]), EXIT_OK);
    assert_eq!(cli(&["chart", "build", "--base", "0,0.5,0"]), EXIT_FAILURE);
}

#[test]
fn pipeline_run_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for o in [&a, &b] {
        let o = o.to_string_lossy().into_owned();
        assert_eq!(cli(&["pipeline", "run", "--config", &config, "--seed", "7", "--out", &o]), EXIT_OK);
    }
    for f in ["report.json", "summary.csv", "curves/spatial_000.csv", "curves/temporal_003.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(a.join("timings.json").is_file());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["format"], REPORT_FORMAT);
    assert_eq!(report["seed"], 7);
    assert_eq!(report["base_points"].as_array().unwrap().len(), 4);
}

#[test]
fn json_and_toml_configs_agree() {
    let toml_cfg = PipelineConfig::from_toml(SMALL).unwrap();
    let json = serde_json::to_string(&toml_cfg).unwrap();
    let json_cfg = PipelineConfig::from_json(&json).unwrap();
    let (a, b) = (run_pipeline(&toml_cfg).unwrap(), run_pipeline(&json_cfg).unwrap());
    assert_eq!(a.to_json(), b.to_json());
    assert!(PipelineConfig::from_toml("[domain]\nfixture = \"ball\"\nradius = 1.0\n").is_err());
    assert!(PipelineConfig::from_toml(&format!("{SMALL}\nbogus = 1\n")).is_err());
}
