use std::process::Command;

fn cavity_sim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-sim")).args(args).output().unwrap()
}

#[test]
fn array_verb_writes_csv() {
    let out = cavity_sim(&["array", "--N", "4", "--r", "1", "--s", "2", "--t-end", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m,n,P\n"));
    assert_eq!(text.lines().count(), 1 + 16);
}

#[test]
fn validation_errors_exit_with_two() {
    assert_eq!(cavity_sim(&["evolve", "--epsilon", "2"]).status.code(), Some(2));
    assert_eq!(cavity_sim(&["figure", "fig5"]).status.code(), Some(2));
    assert_eq!(cavity_sim(&["evolve", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(cavity_sim(&["sweep", "--variable", "delta", "--start", "1", "--stop", "0", "--count", "3"]).status.code(), Some(2));
}

#[test]
fn missing_config_exits_with_four() {
    assert_eq!(cavity_sim(&["evolve", "--config", "/nonexistent/run.json"]).status.code(), Some(4));
}

#[test]
fn unwritable_output_exits_with_four() {
    let out = cavity_sim(&["array", "--N", "3", "--r", "1", "--s", "2", "--out", "/nonexistent/dir/p.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(cavity_sim(&["evolve", "--config", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"J": 0.2, "delta": 0.1, "t_end": 4.0}"#).unwrap();
    let out = dir.path().join("evolve.json");
    let status = cavity_sim(&[
        "evolve", "--config", cfg.to_str().unwrap(), "--J", "0.05", "--dt", "1", "--format", "json", "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert!(status.success());
    let ds = coupled_cavities::experiments::import_json(&out).unwrap();
    assert_eq!(ds.provenance["J"], "0.05");
    assert_eq!(ds.provenance["omega2"], "0.9");
    assert_eq!(ds.rows.len(), 5);
}

#[test]
fn sweep_with_explicit_values() {
    let out = cavity_sim(&["sweep", "--variable", "delta", "--values", "-0.2,0,0.2", "--J", "0.1", "--theta", "0.7853981633974483", "--phi", "3.141592653589793"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1][1] < 1e-12);
    assert!(rows[0][1] > 0.999 && rows[2][1] > 0.999);
}

#[test]
fn master_verb_runs() {
    let out = cavity_sim(&["master", "--gamma11", "0.01", "--gamma22", "0.01", "--cross-damping", "max", "--t-end", "20", "--format", "json"]);
    assert!(out.status.success());
    let ds = coupled_cavities::experiments::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(ds.columns[0], "t");
    assert_eq!(ds.rows.len(), 2401);
}
