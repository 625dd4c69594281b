use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_z3tc"));
    c.env_remove("Z3TC_OUTPUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let v = jsonschema::validator_for(&s).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn close(a: &Value, b: f64, tol: f64) -> bool {
    (a.as_f64().unwrap() - b).abs() <= tol
}

#[test]
fn noiseless_prepare_is_ideal() {
    let doc = json_of(&["prepare", "--lx", "6", "--ly", "4", "--noise", "off"]);
    assert_eq!(doc["schema"], "z3tc.run/1");
    assert_eq!(doc["preset"], "prepare-6x4");
    let r = &doc["result"];
    assert_eq!(r["energy_density"], -1.0);
    let snaps = r["frames"][0]["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 24);
    assert!(snaps.iter().all(|s| s["projectors"][0] == 1.0));
    let l = &r["logical"];
    assert_eq!((l["z_hori"].as_f64(), l["z_vert"].as_f64()), (Some(1.0), Some(1.0)));
    assert!(close(&l["x_hori"], 1.0 / 3.0, 1e-15) && close(&l["x_vert"], 1.0 / 3.0, 1e-15));
}

#[test]
fn bounds_example() {
    let doc = json_of(&["bounds", "--trp", "0.75", "--trq", "0.68", "--sites", "24"]);
    let b = &doc["result"]["bound"];
    assert!(close(&b["per_site_lower"], 0.9654, 5e-5) && close(&b["per_site_upper"], 0.9841, 5e-5));
    let doc = json_of(&["bounds", "--charge", "0.92,0.05,0.03", "--flux", "0.8,0.1,0.1", "--outcome", "0"]);
    let b = &doc["result"]["bound"];
    assert!(close(&b["lower"], 0.72, 1e-12) && close(&b["upper"], 0.80, 1e-12));
}

#[test]
fn compile_preset_count() {
    let doc = json_of(&["compile", "--preset", "prepare-6x4", "--basis", "z"]);
    let n = doc["result"]["report"]["two_qubit_count"].as_u64().unwrap() as f64;
    assert!((n - 251.0).abs() <= 0.15 * 251.0, "{n}");
    let doc = json_of(&["compile", "--preset", "prepare-6x4", "--basis", "x"]);
    let n = doc["result"]["report"]["two_qubit_count"].as_u64().unwrap() as f64;
    assert!((n - 189.0).abs() <= 0.15 * 189.0, "{n}");
}

#[test]
fn compile_circuit_file_and_emit() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("c.json");
    std::fs::write(
        &circuit,
        r#"{"schema":"z3tc.circuit/1","flavor":"qutrit","d":3,"n_qudits":2,"n_cregs":0,"instructions":[
            {"op":"gate","kind":"Fourier","targets":[0]},
            {"op":"gate","kind":"CX","targets":[0,1]}]}"#,
    )
    .unwrap();
    let qasm = dir.path().join("out.qasm");
    let json = dir.path().join("out.json");
    let c = circuit.to_str().unwrap();
    let doc = json_of(&["compile", "--circuit", c, "--basis", "none", "--peephole", "false", "--emit", qasm.to_str().unwrap()]);
    assert_eq!(doc["preset"], Value::Null);
    // H costs 3 entangling gates and CX costs 10
    assert_eq!(doc["result"]["report"]["two_qubit_count"], 13);
    let text = std::fs::read_to_string(&qasm).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("zzphase")).count(), 13);
    json_of(&["compile", "--circuit", c, "--emit", json.to_str().unwrap()]);
    let emitted: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(emitted["flavor"], "qubit");
    assert_valid("circuit.schema.json", &emitted);
    assert_eq!(run(&["compile", "--circuit", c, "--preset", "prepare-4x2"]).status.code(), Some(2));
}

#[test]
fn braids_and_qutrit() {
    let doc = json_of(&["braid-pf"]);
    let last = doc["result"]["anyons"].as_array().unwrap().last().unwrap().clone();
    let mut species: Vec<&str> = last["anyons"].as_array().unwrap().iter().map(|a| a["species"].as_str().unwrap()).collect();
    species.sort();
    assert_eq!(species, ["ebar", "m"]);
    let doc = json_of(&["topo-qutrit", "--layout", "6x2"]);
    for b in doc["result"]["bounds"].as_array().unwrap() {
        assert_eq!((b["lower"].as_f64(), b["upper"].as_f64()), (Some(1.0), Some(1.0)));
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["prepare", "--lx", "4", "--ly", "2", "--noise", "hardware", "--shots", "300", "--seed", "9"];
    let a = run(&args);
    let b = run(&[&args[..], &["--threads", "2"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[&args[..8], &["--seed", "10"]].concat());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"lx": 4, "ly": 2, "seed": 5, "noise": "depolarizing", "shots": 10}"#).unwrap();
    let doc = json_of(&["prepare", "--config", cfg.to_str().unwrap(), "--lx", "6"]);
    let c = &doc["config"];
    assert_eq!((c["lx"].as_u64(), c["ly"].as_u64(), c["seed"].as_u64()), (Some(6), Some(2), Some(5)));
    assert_eq!(c["noise"], "depolarizing");
    assert_eq!(c["p2"], 2e-3);
    assert_eq!(doc["preset"], "prepare-6x2");
    assert_valid("config.schema.json", c);
    std::fs::write(&cfg, r#"{"lx": 4, "colour": "blue"}"#).unwrap();
    assert_eq!(run(&["prepare", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    for args in [
        &["prepare", "--noise", "hardware", "--p2", "1.5"][..],
        &["prepare", "--noise", "hardware", "--p01", "0.5"],
        &["prepare", "--lx", "3"],
        &["braid-cc", "--noise", "hardware"],
        &["compile", "--preset", "teleport"],
        &["bounds", "--trp", "0.5"],
        &["bounds", "--trp", "0.5", "--trq", "0.5", "--sites", "0"],
        &["bounds", "--charge", "1,0", "--flux", "1,0,0", "--outcome", "0"],
        &["topo-qutrit", "--layout", "5x5"],
        &["prepare", "--shots", "0", "--noise", "depolarizing"],
        &["transmogrify"],
        &["prepare", "--config", "/nonexistent/config.json"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn verify_suites_pass() {
    let doc = json_of(&["verify", "--circuits", "10", "--shots", "1000"]);
    assert_eq!(doc["result"]["passed"], true);
    assert_eq!(doc["result"]["suites"].as_array().unwrap().len(), 3);
}

#[test]
fn output_dir_env_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv: PathBuf = dir.path().join("bounds.csv");
    let out = bin()
        .env("Z3TC_OUTPUT_DIR", dir.path().join("results"))
        .args(["bounds", "--trp", "0.9", "--trq", "0.8", "--sites", "4", "--csv", csv.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("results/bounds.json")).unwrap()).unwrap();
    assert_eq!(doc["command"], "bounds");
    let table = std::fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("tr_p,tr_q,n_sites,lower,upper"), "{table}");
    let explicit = dir.path().join("explicit.json");
    let out = bin()
        .env("Z3TC_OUTPUT_DIR", dir.path().join("ignored"))
        .args(["bounds", "--trp", "0.9", "--trq", "0.8", "--sites", "4", "-o", explicit.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success() && explicit.exists() && !dir.path().join("ignored").exists());
}

#[test]
fn every_command_matches_the_schema() {
    for args in [
        &["prepare", "--lx", "4", "--ly", "2"][..],
        &["prepare", "--lx", "4", "--ly", "2", "--noise", "depolarizing", "--shots", "20"],
        &["prepare", "--lx", "4", "--ly", "2", "--noise", "hardware", "--shots", "200", "--spam-mitigate", "false"],
        &["prepare", "--lx", "4", "--ly", "2", "--noise", "hardware", "--shots", "200", "--herald-discard", "false"],
        &["braid-pf"],
        &["braid-cc"],
        &["fuse-pf-pfstar", "--noise", "depolarizing", "--shots", "5"],
        &["topo-qutrit"],
        &["topo-qutrit", "--layout", "6x2", "--noise", "depolarizing", "--shots", "3"],
        &["compile", "--preset", "prepare-4x2", "--policy", "gate-parallel"],
        &["verify", "--circuits", "2", "--shots", "200"],
        &["bounds", "--trp", "0.75", "--trq", "0.68", "--sites", "24", "--trp-se", "0.03", "--trq-se", "0.03"],
    ] {
        let doc = json_of(args);
        assert_valid("run.schema.json", &doc);
        assert_valid("config.schema.json", &doc["config"]);
    }
}

#[test]
fn hardware_prepare_reports_heralding() {
    let doc = json_of(&["prepare", "--lx", "4", "--ly", "4", "--noise", "hardware", "--shots", "2000"]);
    let r = &doc["result"];
    let d = r["discard_fraction"].as_f64().unwrap();
    assert!(d > 0.0 && d < 0.3, "{d}");
    assert!(r["energy_density"].as_f64().unwrap() < r["energy_density_raw"].as_f64().unwrap());
    let kept = json_of(&["prepare", "--lx", "4", "--ly", "4", "--noise", "hardware", "--shots", "2000", "--herald-discard", "false"]);
    assert_eq!(kept["result"]["heralded"]["z"]["leak"], 0);
    assert!(kept["result"]["discard_fraction"].as_f64().unwrap() < d);
}
