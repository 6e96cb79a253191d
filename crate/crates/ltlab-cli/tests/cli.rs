use std::path::Path;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["ltlab"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = ltlab_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn envelope(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("not JSON ({e}): {out}\n{err}"));
    (code, v)
}

fn schema() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/envelope.schema.json");
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&s).unwrap()
}

fn assert_valid(v: &Value) {
    let s = schema();
    let msgs: Vec<String> = match s.validate(v) {
        Ok(()) => return,
        Err(errs) => errs
            .map(|e| format!("{e} at {}", e.instance_path))
            .collect(),
    };
    panic!("envelope fails schema: {msgs:?}\n{v:#}");
}

#[test]
fn empty_command_is_a_usage_error() {
    let (code, out, err) = run(&[]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["constants", "--kappa", "abc", "--d", "1"]).0, 2);
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let (code, _, err) = run(&["constants", "--d", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("kappa"));
}

#[test]
fn constants_at_three_halves_in_one_dimension() {
    let (code, v) = envelope(&["constants", "--kappa", "1.5", "--d", "1"]);
    assert_eq!(code, 0);
    assert_valid(&v);
    let r = &v["result"];
    assert!((r["L_sc"].as_f64().unwrap() - 0.1875).abs() < 1e-12);
    assert!((r["L1"].as_f64().unwrap() - 0.1875).abs() < 1e-8);
    assert_eq!(v["provenance"]["cache_keys"].as_array().unwrap().len(), 1);
}

#[test]
fn crossing_in_two_dimensions() {
    let (code, v) = envelope(&["crossing", "--d", "2"]);
    assert_eq!(code, 0);
    assert_valid(&v);
    let k = v["result"]["kappa1"].as_f64().unwrap();
    assert!((k - 1.165).abs() < 5e-3, "{k}");
}

#[test]
fn numerical_failure_exits_one_with_error_json() {
    // κ = 0.2 in d = 1 lies below the admissible range.
    let (code, v) = envelope(&["constants", "--kappa", "0.2", "--d", "1"]);
    assert_eq!(code, 1);
    assert_valid(&v);
    assert_eq!(v["status"], "error");
    assert_eq!(v["error"]["kind"], "InvalidParameter");
}

#[test]
fn soliton_csv_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let (code, v) = envelope(&[
            "soliton",
            "--eta1",
            "1",
            "--eta2",
            "0.5",
            "--a2",
            "10",
            "--grid",
            "-10:10:0.25",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        assert_valid(&v);
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("soliton.csv")).unwrap();
    let (x, y) = (read(&a), read(&b));
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("x,v1,v2,res1,res2,c1,c2\n"));
    assert_eq!(text.lines().count(), 82);
    assert!(a.path().join("soliton.json").exists());
}

#[test]
fn config_file_fills_missing_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# weak norm settings\np = 2\nr = 0.5\nsteps = 2:1,1:3\n",
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let (code, v) = envelope(&["weaknorm", "--config", c]);
    assert_eq!(code, 0);
    assert_eq!(v["config"]["r"], 0.5);
    let (_, w) = envelope(&["weaknorm", "--config", c, "--r", "1"]);
    assert_eq!(w["config"]["r"], 1.0);
    assert!((w["result"]["quasinorm"].as_f64().unwrap() - 1.25).abs() < 1e-12);
    assert_valid(&w);
}

#[test]
fn weaknorm_reads_json_input() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    std::fs::write(&f, r#"{"steps": [[3.0, 2.0]], "p": 1.5, "r": 0.0}"#).unwrap();
    let (code, v) = envelope(&["weaknorm", "--input", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    // An indicator of height 3 on a set of measure 2 has [f]′ = 3·2^{2/3}.
    let want = 3.0 * 2f64.powf(1.0 / 1.5);
    assert!((v["result"]["quasinorm"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn ground_state_uses_and_reports_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "ground-state",
        "--d",
        "1",
        "--p",
        "2",
        "--cache",
        cache.to_str().unwrap(),
    ];
    let (code, v) = envelope(&args);
    assert_eq!(code, 0);
    assert_valid(&v);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    let (_, w) = envelope(&args);
    assert_eq!(v["result"], w["result"]);
    assert_eq!(w["provenance"]["cache_dir"], cache.to_str().unwrap());
}

#[test]
fn scf_nonconvergence_is_reported_as_fail() {
    let (code, v) = envelope(&[
        "scf",
        "--p",
        "1.5",
        "--N",
        "1",
        "--max-iter",
        "3",
        "--h",
        "0.05",
        "--half-width",
        "20",
    ]);
    assert_eq!(code, 1);
    assert_valid(&v);
    assert_eq!(v["status"], "fail");
    assert_eq!(v["result"]["converged"], false);
}

#[test]
fn reproduce_tilde_gaps_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, v) = envelope(&[
        "reproduce",
        "tilde-gaps",
        "--out",
        dir.path().to_str().unwrap(),
        "--plot",
    ]);
    assert_eq!(code, 0);
    assert_valid(&v);
    assert_eq!(v["result"]["passed"], true);
    assert!(dir.path().join("tilde_gaps.csv").exists());
    assert!(dir.path().join("tilde_gaps.gp").exists());
}

#[test]
fn reproduce_soliton_suite_passes() {
    let (code, v) = envelope(&["reproduce", "soliton-suite"]);
    assert_eq!(code, 0);
    assert_valid(&v);
    assert!(v["result"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn reproduce_kappa1_table_passes() {
    let (code, v) = envelope(&["reproduce", "kappa1-table"]);
    assert_eq!(code, 0, "{v:#}");
    assert_eq!(v["result"]["checks"].as_array().unwrap().len(), 3);
}
