use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn missing_config_exits_2_and_names_path() {
    let out = run(&["steady", "--config", "/no/such/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/config.json"));
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(run(&["steady", "--bogus"]).status.code(), Some(2));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    let text = std::fs::read_to_string(config("fig2.json"))
        .unwrap()
        .replace("\"kappa\": [\n    215000.0", "\"kappa\": [\n    -1.0");
    std::fs::write(&p, text).unwrap();
    let out = run(&["steady", "--config", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kappa"));
}

#[test]
fn unstable_covariance_exits_1_with_max_real_part() {
    let out = run(&["covariance", "--config", path_str(&config("fig2.json"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("max eigenvalue real part"), "{err}");
}

#[test]
fn entangle_reports_both_criteria_for_both_pairs() {
    let out = run(&["entangle", "--config", path_str(&config("stable_demo.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for pair in ["mirrors", "fields"] {
        assert!(v[pair]["duan"]["total"].is_f64());
        assert!(v[pair]["simon"]["nu_min"].is_f64());
    }
}

#[test]
fn steady_prints_complex_pairs() {
    let out = run(&["steady", "--config", path_str(&config("fig2.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["a_s"][0].as_array().unwrap().len(), 2);
    assert_eq!(v["p_s"], serde_json::json!([0.0, 0.0]));
}

#[test]
fn stability_matrix_dump_has_24_rows() {
    let out = run(&["stability", "--config", path_str(&config("fig2.json")), "--matrix"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 25);
    assert!(text.lines().all(|l| l.split(',').count() == 14));
}

#[test]
fn spectrum_writes_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.csv");
    let out = run(&[
        "spectrum",
        "--config",
        path_str(&config("stable_demo.json")),
        "--grid",
        "11",
        "--omega-max",
        "2e7",
        "--variances",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "omega_hz,s_out,var_x,var_y");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("-20000000,"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "spectrum");
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(outputs.contains(&out_path.to_str().unwrap()));
    assert!(manifest["parameters"]["kappa"].is_array());
}

#[test]
fn spectrum_of_unstable_config_exits_1() {
    let out = run(&["spectrum", "--config", path_str(&config("fig4a.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_csv_and_json() {
    let spec = config("sweep_injection.json");
    let out = run(&["sweep", "--spec", path_str(&spec)]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "axis_value,stable,duan_fields,simon_fields,s_out_min,max_real_part");
    assert_eq!(text.lines().count(), 4);

    let out = run(&["sweep", "--spec", path_str(&spec), "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
}

#[test]
fn sweep_is_deterministic() {
    let spec = config("sweep_detuning.json");
    let a = run(&["sweep", "--spec", path_str(&spec)]).stdout;
    let b = run(&["sweep", "--spec", path_str(&spec)]).stdout;
    assert_eq!(a, b);
}

#[test]
fn shipped_configs_carry_reference_parameters() {
    for name in ["fig2.json", "fig4a.json", "fig4b.json"] {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(config(name)).unwrap()).unwrap();
        assert_eq!(v["cavity_length"], 5e-3);
        assert_eq!(v["mirror_mass"], 20e-12);
        assert_eq!(v["kappa"], serde_json::json!([215e3, 215e3]));
        assert_eq!(v["mech_freq"], serde_json::json!([10e6, 10e6]));
        assert_eq!(v["wavelength"], serde_json::json!([810e-9, 810e-9]));
        assert_eq!(v["drive"]["power"], serde_json::json!([10e-3, 10e-3]));
        assert_eq!(v["mech_loss"]["quality"], serde_json::json!([6700.0, 6700.0]));
        assert_eq!(v["inject_rate"], 2000.0);
        assert_eq!(v["atom_decay"], 1.3e6);
        assert_eq!(v["atom_detuning"], serde_json::json!([4e6, 4e6]));
        assert_eq!(v["temperature"], 42e-6);
    }
}
