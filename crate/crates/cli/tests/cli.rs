use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::process::{Command, Output};

fn jostkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jostkit")).args(args).output().unwrap()
}

fn run(dir: &Path, command: &str, config: &str) -> Output {
    let cfg = dir.join(format!("{command}.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    jostkit(&[command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn diagnostic(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|_| panic!("stderr is not JSON: {text}"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn check_manifest(out: &Path) -> Value {
    let m: Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = m["files"].as_array().unwrap();
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    for f in files {
        let bytes = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"].as_str().unwrap(), hex);
    }
    let mut present: Vec<String> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    listed.sort();
    present.sort();
    assert_eq!(listed, present);
    m
}

const FREE_SCATTER: &str = r#"{"problem": {"l": 0.5, "potential": "free"}, "grids": {"k": {"logspace": [0.1, 100, 9]}}}"#;

#[test]
fn scatter_free_has_unit_f() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "scatter", FREE_SCATTER);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let (header, rows) = read_csv(&out.join("scattering.csv"));
    assert_eq!(header, ["k", "re_f", "im_f", "re_F", "im_F", "abs_F", "im_m"]);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert_eq!(r[5], 1.0);
    }
    let m = check_manifest(&out);
    assert_eq!(m["command"], "scatter");
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("scattering.json")).unwrap()).unwrap();
    assert_eq!(summary["bound_states"].as_array().unwrap().len(), 0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg = r#"{"problem": {"l": 0, "potential": "well(1,0,1)"}, "grids": {"k": [0.5, 1, 7.5]}, "seed": 3}"#;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(run(a.path(), "scatter", cfg).status.success());
    assert!(run(b.path(), "scatter", cfg).status.success());
    for name in ["scattering.csv", "scattering.json", "config.json", "manifest.json"] {
        let x = std::fs::read(a.path().join("out").join(name)).unwrap();
        let y = std::fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn rerun_replaces_previous_outputs_and_refuses_foreign_files() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), "scatter", FREE_SCATTER).status.success());
    let spectral = r#"{"problem": {"l": 0, "potential": "well(20,0,1)"}, "grids": {"lambda": {"linspace": [0.5, 50, 5]}}}"#;
    let o = run(dir.path(), "spectral", spectral);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    check_manifest(&out);
    assert!(!out.join("scattering.csv").exists());
    let s: Value = serde_json::from_str(&std::fs::read_to_string(out.join("spectral.json")).unwrap()).unwrap();
    assert_eq!(s["discrete"].as_array().unwrap().len(), 1);
    std::fs::write(out.join("notes.txt"), "mine").unwrap();
    let o = run(dir.path(), "spectral", spectral);
    assert_eq!(o.status.code(), Some(2));
    assert!(diagnostic(&o)["message"].as_str().unwrap().contains("notes.txt"));
    assert!(out.join("notes.txt").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        "not json",
        r#"{"problem": {"l": 0, "potential": "free"}, "grids": {"k": [1, 0.5]}}"#,
        r#"{"problem": {"l": 0, "potential": "nosuch(1)"}, "grids": {"k": [1]}}"#,
        r#"{"problem": {"l": -1, "potential": "free"}, "grids": {"k": [1]}}"#,
        r#"{"problem": {"l": 0, "potential": "free"}}"#,
        r#"{"command": "verify", "problem": {"l": 0, "potential": "free"}, "grids": {"k": [1]}}"#,
    ] {
        let o = run(dir.path(), "scatter", cfg);
        assert_eq!(o.status.code(), Some(2), "{cfg}");
        let d = diagnostic(&o);
        assert_eq!(d["error"], "config_error");
        assert_eq!(d["exit_code"], 2);
    }
    let o = jostkit(&["scatter"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(diagnostic(&o)["error"], "config_error");
}

#[test]
fn hypothesis_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "scatter", r#"{"problem": {"l": 0, "potential": "power(1,3,1)"}, "grids": {"k": [1]}}"#);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(diagnostic(&o)["error"], "hypothesis_violation");
}

#[test]
fn resonance_refusal_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": {"l": 0, "potential": "well(2.4674011002723395,0,1)"}, "grids": {"t": [1], "x": [1]}}"#;
    let o = run(dir.path(), "propagate", cfg);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(diagnostic(&o)["error"], "resonance_refusal");
    check_manifest(&dir.path().join("out"));
}

#[test]
fn non_convergence_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": {"l": 0, "potential": "well(1,0,1)"}, "grids": {"t": [2], "x": [1, 2]},
                  "state": {"center": 2.5, "width": 0.5}, "tolerances": {"k_cap": 1.0}}"#;
    let o = run(dir.path(), "propagate", cfg);
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(diagnostic(&o)["error"], "non_convergence");
    let m = check_manifest(&dir.path().join("out"));
    assert!(m["files"].as_array().unwrap().iter().any(|f| f["path"] == "kernel.csv"));
}

#[test]
fn certify_free_gives_the_sharp_constant() {
    // the grid contains x = y = sqrt(pi t), where |K| = 1/sqrt(pi t)
    let dir = tempfile::tempdir().unwrap();
    let pi = std::f64::consts::PI;
    let cfg = format!(
        r#"{{"problem": {{"l": 0, "potential": "free"}}, "grids": {{"t": [1, 2], "x": [1, {}, {}, 3]}}}}"#,
        pi.sqrt(),
        (2.0 * pi).sqrt()
    );
    let o = run(dir.path(), "certify", &cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out").join("decay.csv"));
    assert_eq!(header[2], "sqrt_t_M");
    for r in rows {
        assert!((r[2] - 1.0 / pi.sqrt()).abs() < 1e-6, "{r:?}");
    }
}

#[test]
fn propagate_writes_kernel_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": {"l": 0, "potential": "well(20,0,1)"}, "grids": {"t": [1, 3], "x": [0.5, 2], "y": [1]},
                  "state": {"center": 2.5, "width": 0.7}, "tolerances": {"amp_tol": 1e-6}}"#;
    let o = run(dir.path(), "propagate", cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let (header, rows) = read_csv(&out.join("kernel.csv"));
    assert_eq!(header, ["t", "x", "y", "re_K", "im_K", "abs_K"]);
    assert_eq!(rows.len(), 4);
    let (_, rows) = read_csv(&out.join("state.csv"));
    assert_eq!(rows.len(), 4);
    // one bound state, so the discrete part is present
    assert!(rows.iter().all(|r| r[4].abs() + r[5].abs() > 0.0));
}

#[test]
fn solve_reads_a_tabulated_potential() {
    let dir = tempfile::tempdir().unwrap();
    let mut table = String::from("x,q\n");
    for i in 0..=40 {
        let x = i as f64 * 0.05;
        table.push_str(&format!("{x},{}\n", -(1.0 - x / 2.0)));
    }
    std::fs::write(dir.path().join("q.csv"), table).unwrap();
    let cfg = r#"{"problem": {"l": 1, "potential": "tabulated(q.csv)"}, "grids": {"k": [0.5, 2], "x": [0.5, 1, 3]}}"#;
    let o = run(dir.path(), "solve", cfg);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&dir.path().join("out").join("solutions.csv"));
    assert_eq!(header.len(), 10);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.iter().all(|v| v.is_finite())));
}

#[test]
fn verify_well_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "verify", r#"{"problem": {"l": 0, "potential": "well(1,0,1)"}, "seed": 7}"#);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out").join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    let m = &v["matrix"];
    assert_eq!(m["columns"].as_array().unwrap().len(), 1);
    assert!(m["cells"].as_array().unwrap().iter().all(|row| row[0] == true));
}

#[test]
fn presets_table() {
    let o = jostkit(&["presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("free") && text.contains("F = 1"));
    assert!(text.contains("well(v0,a,b)") && text.contains("matching oracle"));
    assert!(text.contains("tabulated(file)") && text.contains("CSV"));
    let o = jostkit(&["presets", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
}
