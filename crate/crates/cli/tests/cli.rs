use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("cqm-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn cqm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqm")).args(args).arg("--out").arg(out).output().unwrap()
}

fn with_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fig1_writes_outputs_and_manifest() {
    let d = scratch("fig1");
    let out = d.join("out");
    let o = cqm(&["fig1", "--seed", "7"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("fig1.csv")).unwrap();
    assert!(csv.starts_with("xbar,Vbar,alpha,V0,L\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 561);
    let m = json(out.join("manifest.json"));
    assert_eq!(m["command"], "fig1");
    assert_eq!(m["seed"], 7);
    assert!(m["timings"].is_null());
    assert_eq!(m["config"]["x_grid"]["n"], 561);
    let names: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["fig1.csv", "fig1.svg"]);
    let svg = std::fs::read_to_string(out.join("fig1.svg")).unwrap();
    assert!(svg.contains("viewBox=\"0 0 640 420\"") && svg.contains("<!-- generator: cqm "));
    // exactly one manifest in the directory
    let manifests = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().file_name() == "manifest.json").count();
    assert_eq!(manifests, 1);
}

#[test]
fn record_timings_fills_the_field() {
    let d = scratch("timings");
    let o = cqm(&["fig1", "--record-timings"], &d);
    assert!(o.status.success());
    assert!(json(d.join("manifest.json"))["timings"]["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn config_errors_exit_2_with_path() {
    let d = scratch("cfgerr");
    let cfg = with_config(&d, r#"{"alphas": []}"#);
    let o = cqm(&["fig1", "--config", &cfg], &d.join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`alphas`"));

    let cfg = with_config(&d, r#"{"k_grid": {"min": 0.1, "max": 2, "n": "many"}}"#);
    let o = cqm(&["fig2", "--config", &cfg], &d.join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("k_grid.n"), "{}", String::from_utf8_lossy(&o.stderr));

    let cfg = with_config(&d, r#"{"modes": ["qm", "wkb"]}"#);
    let o = cqm(&["fig2", "--config", &cfg], &d.join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("modes[1]"));

    let o = cqm(&["rotor", "--config", "/nonexistent/cfg.json"], &d.join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_rotor_moments_are_rejected() {
    let d = scratch("rotor-bad");
    let cfg = with_config(&d, r#"{"moments": [1, -2, 3]}"#);
    let o = cqm(&["rotor", "--config", &cfg], &d.join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`moments`"));
}

#[test]
fn rotor_reports_geometry() {
    let d = scratch("rotor");
    let cfg = with_config(&d, r#"{"periods": 20, "svg": false}"#);
    let o = cqm(&["rotor", "--config", &cfg], &d);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = json(d.join("orbit_geometry.json"));
    assert_eq!(g["manifold_dim"], 9);
    assert_eq!(g["orbit_dim"], 6);
    assert_eq!(g["kernel"], serde_json::json!(["I11", "I22", "I33"]));
    let c = json(d.join("rotor_conservation.json"));
    assert!(c["relative_energy_drift"].as_f64().unwrap() < 1e-9);
    assert!(c["precession"]["relative_error"].as_f64().unwrap() < 1e-6);
    assert!(!d.join("rotor_lbar.svg").exists());
    let m = json(d.join("manifest.json"));
    assert_eq!(m["fixtures"][0]["name"], "rma");
}

#[test]
fn algebra_report_from_names_and_files() {
    let d = scratch("algebra");
    std::fs::write(d.join("heis.json"), r#"{"name":"heis","dim":3,"c":[[0,1,2,1.0]]}"#).unwrap();
    let cfg = with_config(
        &d,
        r#"{"entries": [
            {"fixture": "rma", "density": [1, 2, 3, 0, 0, 0, 0, 0, 0]},
            {"fixture": "so3", "density": [0, 0, 2]},
            {"fixture": "heis.json", "density": [0, 0, 1]}
        ]}"#,
    );
    let o = cqm(&["algebra-report", "--config", &cfg], &d.join("out"));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(d.join("out/algebra_report.json"));
    let dims: Vec<u64> = r.as_array().unwrap().iter().map(|e| e["orbit_dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, [6, 2, 2]);
    let m = json(d.join("out/manifest.json"));
    let fx: Vec<&str> = m["fixtures"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(fx, ["heis.json", "rma", "so3"]);

    let cfg = with_config(&d, r#"{"entries": [{"fixture": "so3", "density": [1, 2]}]}"#);
    let o = cqm(&["algebra-report", "--config", &cfg], &d.join("out2"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("entries[0].density"));
}

#[test]
fn linear_formula_fails_the_oracle_with_exit_4() {
    let d = scratch("oracle");
    let cfg = with_config(&d, r#"{"formula": "linear", "kbars": [1.1]}"#);
    let o = cqm(&["oracle", "--config", &cfg], &d);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(d.join("oracle.json"));
    assert_eq!(r["agreement_pass"], false);
    assert!(r["max_discrepancy"].as_f64().unwrap() > 0.05);
    assert!(r["fidelity"]["after_scattering"].as_f64().unwrap() < 0.99);
    assert!(d.join("manifest.json").exists());
}

#[test]
fn zero_threads_is_a_config_error() {
    let d = scratch("threads");
    let o = cqm(&["fig1", "--threads", "0"], &d);
    assert_eq!(o.status.code(), Some(2));
}
