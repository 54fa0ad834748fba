use std::path::Path;
use std::process::{Command, Output};

fn ugfair(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ugfair"))
        .args(args)
        .env_remove("UGFAIR_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_field(line: &str, col: usize) -> f64 {
    line.split(',').nth(col).unwrap().parse().unwrap()
}

fn grids() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../grids"))
}

#[test]
fn stationary_baselines() {
    let o = ugfair(&["stationary", "--beta", "1", "--mp", "0", "--mr", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(last_field(&row, 11) > 0.99, "{row}");

    let o = ugfair(&["stationary", "--beta", "0.1", "--mr", "1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let pi: Vec<f64> = v["stationary"]["pi"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!(pi[0] > pi[1] && pi[0] > pi[2] && pi[0] > pi[3]);
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        &["stationary", "--h", "0.3", "--l", "0.5"][..],
        &["stationary", "--n", "1"],
        &["stationary", "--mp", "-1"],
        &["stationary", "--beta", "-2"],
        &["fixation", "--edge", "HH-LL"],
        &["fixation"],
        &["figure", "fig2"],
        &["simulate", "fixation", "--edge", "HL-HH"],
        &["simulate", "longrun", "--n", "20"],
        &["nonsense"],
    ] {
        let o = ugfair(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn fixation_edges() {
    let o = ugfair(&["fixation", "--edge", "HL-HH", "--mr", "1", "--beta", "0.1"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!((last_field(&row, 3) - 0.1928).abs() < 1e-4, "{row}");
    let o = ugfair(&["fixation", "--edge", "LH-HH", "--mp", "1", "--beta", "0.1"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!((last_field(&row, 3) - 0.32).abs() < 0.01, "{row}");
    let o = ugfair(&["fixation", "--edge", "LL-LH", "--mr", "1", "--beta", "0.1"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!((last_field(&row, 3) - 0.16).abs() < 0.01, "{row}");
    let o = ugfair(&["fixation", "--all-edges"]);
    assert_eq!(stdout(&o).lines().count(), 13);
}

#[test]
fn threshold_mode_reports_a_count() {
    let o = ugfair(&["sweep", "--threshold", "mr", "--beta", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",M_R,1"));
    // no count can push a mass above 1
    let o = ugfair(&["sweep", "--threshold", "mr", "--beta", "100", "--n", "10", "--cutoff", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let cfg = grids().join("single.cfg");
    let o = ugfair(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], ugfair::sweep::CSV_HEADER);
    assert!(lines[2].starts_with("# total=1 records=1"));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("one.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["outputs"][0], "one.csv");
    assert_eq!(m["params"]["m_r"]["start"], 1);
    assert!(stdout(&o).contains("pi(HH) > 0.99"));
}

#[test]
fn sweep_flags_override_config() {
    let cfg = grids().join("single.cfg");
    let o = ugfair(&["sweep", "--config", cfg.to_str().unwrap(), "--beta", "1,10", "--mr", "2"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("samaritan")).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("samaritan,100,100,0,2,0.5,0.1,1,"));
    assert!(rows[1].starts_with("samaritan,100,100,0,2,0.5,0.1,10,"));
}

#[test]
fn malformed_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "n_p = 100\nunknown_key = 3\n").unwrap();
    let out = dir.path().join("x.csv");
    let o = ugfair(&["sweep", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = ugfair(&["sweep", "--config", "/definitely/not/here.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing_dir").join("x.csv");
    let cfg = grids().join("single.cfg");
    let o = ugfair(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn shipped_grid_configs_parse() {
    for name in ["fig4.cfg", "fig9.cfg", "single.cfg"] {
        let text = std::fs::read_to_string(grids().join(name)).unwrap();
        let spec: ugfair::GridSpec = toml::from_str(&text).unwrap();
        spec.validate().unwrap();
    }
    let fig4: ugfair::GridSpec = toml::from_str(&std::fs::read_to_string(grids().join("fig4.cfg")).unwrap()).unwrap();
    assert_eq!(fig4, ugfair::GridSpec::robustness(ugfair::AiProposerKind::Samaritan));
    let fig9: ugfair::GridSpec = toml::from_str(&std::fs::read_to_string(grids().join("fig9.cfg")).unwrap()).unwrap();
    assert_eq!(fig9, ugfair::GridSpec::robustness(ugfair::AiProposerKind::Discriminatory));
}

#[test]
fn simulate_fixation_records_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc.csv");
    let o = ugfair(&[
        "simulate", "fixation", "--n", "20", "--mr", "1", "--edge", "HL-HH", "--trials", "20000", "--seed", "7",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().nth(1).unwrap();
    let p = last_field(row, 3);
    let se = last_field(row, 9);
    let target = 1.0 / (1..=20).map(|k| 1.0 / k as f64).sum::<f64>();
    assert!((p - target).abs() <= 3.0 * se, "{row}");
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("mc.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["rng"]["seed"], 7);
    assert!(m["rng"]["generator"].as_str().unwrap().contains("pcg64"));
}

#[test]
fn all_trials_timing_out_exit_3() {
    let o = ugfair(&[
        "simulate", "fixation", "--n", "50", "--edge", "LL-HL", "--trials", "5", "--steps", "1", "--seed", "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulation_is_reproducible_from_the_command_line() {
    let args = ["simulate", "fixation", "--n", "12", "--edge", "LH-HH", "--mp", "2", "--trials", "3000", "--seed", "99"];
    let a = ugfair(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_ugfair")).args(args).env("UGFAIR_WORKERS", "3").output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let args = ["simulate", "longrun", "--n", "8", "--mu", "1e-3", "--steps", "2e5", "--realizations", "3", "--seed", "5"];
    let a = ugfair(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_ugfair")).args(args).env("UGFAIR_WORKERS", "2").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn heavy_mutation_exit_3() {
    let o = ugfair(&["simulate", "longrun", "--n", "20", "--mu", "0.5", "--steps", "1e5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn figure_bundle_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = ugfair(&["figure", "fig8", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(dir.path().join("fig8_transitions.csv")).unwrap();
    ugfair(&["figure", "fig8", "--out", d]);
    assert_eq!(first, std::fs::read(dir.path().join("fig8_transitions.csv")).unwrap());

    let o = ugfair(&["--workers", "2", "figure", "fig7", "--out", d]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("fig7_fractions.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 101 * 2);
    assert!(dir.path().join("fig7.manifest.json").exists());
}
