use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn sephide(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sephide"))
        .args(args)
        .env_remove("SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn all_checks_pass(v: &Value) -> bool {
    v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true)
}

fn diag(i: usize, side: usize, w: f64) -> Vec<Vec<[f64; 2]>> {
    let mut m = vec![vec![[0.0, 0.0]; side]; side];
    m[i][i] = [w, 0.0];
    m
}

fn write_doc(dir: &TempDir, name: &str, doc: &Value) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, serde_json::to_vec(doc).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

/// |00⟩ against |11⟩ on two qubits.
fn orthogonal_pair(dir: &TempDir) -> String {
    write_doc(dir, "orth.json", &json!({"dA": 2, "dB": 2, "eta0": 0.5, "rho0": diag(0, 4, 1.0), "rho1": diag(3, 4, 1.0)}))
}

fn identical(dir: &TempDir, eta0: f64) -> String {
    let mut m = vec![vec![[0.0, 0.0]; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = [0.25, 0.0];
    }
    write_doc(dir, &format!("same{eta0}.json"), &json!({"dA": 2, "dB": 2, "eta0": eta0, "rho0": m, "rho1": m}))
}

fn f_oracle(x: f64) -> f64 {
    3.0 * x * x - 2.0 * x * x * x
}

#[test]
fn verify_example1_reports_five_and_seven_twelfths() {
    let o = sephide(&["verify", "example1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_of(&o);
    assert_eq!(v["status"], "pass");
    assert!(all_checks_pass(&v));
    assert_eq!(v["result"]["tr_h"], "5/12");
    assert_eq!(v["result"]["tr_h_pt"], "7/12");
    let tr_h = v["checks"].as_array().unwrap().iter().find(|c| c["check"] == "Tr|H|").unwrap();
    assert!((tr_h["value"].as_f64().unwrap() - 5.0 / 12.0).abs() <= 1e-9);
}

#[test]
fn verify_exampled_five() {
    let o = sephide(&["verify", "exampled", "--d", "5", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_of(&o);
    assert!(all_checks_pass(&v));
    assert_eq!(v["result"]["tr_h"], "7/20");
    assert_eq!(v["result"]["tr_h_pt"], "13/20");
    let names: Vec<&str> = v["checks"].as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert!(names.contains(&"PT identity 4") && names.contains(&"quad sign sums"), "{names:?}");
}

#[test]
fn table_output_lists_the_fractions() {
    let o = sephide(&["verify", "example1"]);
    assert_eq!(code(&o), 0);
    let t = String::from_utf8(o.stdout).unwrap();
    assert!(t.contains("PASS") && t.contains("5/12") && t.contains("7/12"), "{t}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "exampled", "--d", "4"][..],
        &["verify", "exampled"],
        &["verify"],
        &["verify", "example1", "--d", "3"],
        &["verify", "example1", "--bogus"],
        &["frobnicate"],
        &["simulate", "example1", "--m", "1", "--trials", "0"],
        &["bound", "--ensemble", "/nonexistent/file.json"],
        &["verify", "example1", "--format", "xml"],
    ] {
        let o = sephide(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn malformed_ensemble_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let p = write_doc(&dir, "bad.json", &json!({"dA": 2, "dB": 2, "eta0": 0.5, "rho0": [[[1.0, 0.0]]], "rho1": [], "extra": 1}));
    let o = sephide(&["ppt", "--ensemble", &p]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let mut skew = diag(0, 4, 1.0);
    skew[0][1] = [0.3, 0.0];
    let p = write_doc(&dir, "skew.json", &json!({"dA": 2, "dB": 2, "eta0": 0.5, "rho0": skew, "rho1": diag(3, 4, 1.0)}));
    let o = sephide(&["ppt", "--ensemble", &p]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("Hermitian"), "{}", stderr(&o));
}

#[test]
fn bound_example1_rows() {
    let o = sephide(&["bound", "example1", "--m-max", "2", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,L,f_m,bound,envelope"));
    let bounds: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    let mut x = 5.0 / 12.0;
    let mut want = Vec::new();
    for _ in 0..3 {
        want.push(0.5 + x);
        x = f_oracle(x);
    }
    assert_eq!(bounds.len(), 3);
    for ((got, w), rounded) in bounds.iter().zip(&want).zip([0.91667, 0.87616, 0.81803]) {
        assert!((got - w).abs() <= 1e-12, "{got} vs {w}");
        assert!((got - rounded).abs() <= 5e-6, "{got} vs {rounded}");
    }
}

#[test]
fn bound_exampled_nine_at_m_zero() {
    let o = sephide(&["bound", "exampled", "--d", "9", "--m-max", "0", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_of(&o);
    let rows = v["result"]["series"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["bound"].as_f64().unwrap() - (0.5 + 11.0 / 36.0)).abs() <= 1e-12);
    assert_eq!(v["result"]["tr_h_exact"], "11/36");
}

#[test]
fn bound_refuses_certificate_at_one_half() {
    let dir = TempDir::new().unwrap();
    let p = orthogonal_pair(&dir);
    let o = sephide(&["bound", "--ensemble", &p]);
    assert_eq!(code(&o), 1);
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    assert!(err.contains("hypothesis") && err.contains("Tr|H| < 1/2"), "{err}");
}

#[test]
fn bound_from_exported_file_matches_construction() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("ex1.json");
    let o = sephide(&["export", "example1", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = sephide(&["bound", "--ensemble", p.to_str().unwrap(), "--m-max", "1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_of(&o);
    let tr_h = v["result"]["series"]["tr_h"].as_f64().unwrap();
    // the optimum sits at the construction's certificate
    assert!(tr_h <= 5.0 / 12.0 + 1e-6, "{tr_h}");
}

#[test]
fn ppt_orthogonal_pair_is_perfect() {
    let dir = TempDir::new().unwrap();
    let o = sephide(&["ppt", "--ensemble", &orthogonal_pair(&dir), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json_of(&o)["result"];
    assert!((r["dual"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!((r["primal"].as_f64().unwrap() - 1.0).abs() <= 1e-6);
    assert!(r["gap"].as_f64().unwrap().abs() <= 1e-6);
}

#[test]
fn ppt_example1_export_is_below_eleven_twelfths() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("ex1.json");
    assert_eq!(code(&sephide(&["export", "example1", "--out", p.to_str().unwrap()])), 0);
    let o = sephide(&["ppt", "--ensemble", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_of(&o);
    let r = &v["result"];
    let (dual, primal) = (r["dual"].as_f64().unwrap(), r["primal"].as_f64().unwrap());
    assert!(dual <= 11.0 / 12.0 + 1e-6, "{dual}");
    assert!(primal <= dual + 1e-9);
    assert!(all_checks_pass(&v));
}

#[test]
fn ppt_identical_states() {
    let dir = TempDir::new().unwrap();
    let o = sephide(&["ppt", "--ensemble", &identical(&dir, 0.5), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json_of(&o)["result"];
    assert_eq!(r["dual"].as_f64().unwrap(), 0.5);
    assert_eq!(r["primal"].as_f64().unwrap(), 0.5);

    let o = sephide(&["ppt", "--ensemble", &identical(&dir, 0.3), "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json_of(&o)["result"];
    assert!((r["dual"].as_f64().unwrap() - 0.7).abs() <= 1e-9);
    assert!((r["primal"].as_f64().unwrap() - 0.7).abs() <= 1e-9);
}

#[test]
fn ppt_iteration_cap_exits_three() {
    let o = sephide(&["ppt", "example1", "--max-iters", "1", "--format", "json"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let v = json_of(&o);
    assert_eq!(v["status"], "unconverged");
    assert_eq!(v["result"]["dual_converged"], false);
}

#[test]
fn simulate_example1_one_level() {
    let o = sephide(&[
        "simulate", "example1", "--m", "1", "--trials", "100000", "--seed", "7", "--adversary", "computational",
        "--format", "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = &json_of(&o)["result"];
    assert_eq!(r["global_success"].as_f64().unwrap(), 1.0);
    assert_eq!(r["L"], 3);
    let rate = r["adversary_success"].as_f64().unwrap();
    let sigma = r["adversary_stderr"].as_f64().unwrap();
    assert!(rate <= 0.8762 + 3.0 * sigma, "{rate} ± {sigma}");
    assert!((r["bound"].as_f64().unwrap() - (0.5 + f_oracle(5.0 / 12.0))).abs() <= 1e-12);

    let plain = sephide(&["simulate", "example1", "--m", "1", "--trials", "100000", "--seed", "7", "--format", "json"]);
    assert_eq!(code(&plain), 0);
    let r = &json_of(&plain)["result"];
    assert_eq!(r["global_success"].as_f64().unwrap(), 1.0);
    assert!(r["adversary_success"].is_null());
}

#[test]
fn json_and_csv_runs_are_byte_identical() {
    for args in [
        &["simulate", "exampled", "--d", "3", "--m", "2", "--trials", "2000", "--seed", "3", "--adversary", "computational", "--format", "json"][..],
        &["simulate", "example1", "--m", "1", "--trials", "2000", "--format", "csv"],
        &["bound", "example1", "--format", "csv"],
        &["bound", "example1", "--format", "json"],
        &["verify", "exampled", "--d", "3", "--format", "json"],
    ] {
        let a = sephide(args);
        let b = sephide(args);
        assert_eq!(code(&a), 0, "{args:?}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("report.json");
    let to_file = sephide(&["bound", "example1", "--m-max", "3", "--format", "json", "--out", p.to_str().unwrap()]);
    assert_eq!(code(&to_file), 0);
    assert!(to_file.stdout.is_empty());
    let to_stdout = sephide(&["bound", "example1", "--m-max", "3", "--format", "json"]);
    assert_eq!(std::fs::read(&p).unwrap(), to_stdout.stdout);
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let o = sephide(&["bound", "example1", "--m-max", "0", "--format", "json"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text.lines().find(|l| l.trim_start().starts_with("\"bound\"")).unwrap();
    let token = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = token.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{token}");
    assert_eq!(token.parse::<f64>().unwrap(), 0.5 + 5.0 / 12.0);
}

#[test]
fn provenance_records_seed_and_digest() {
    let dir = TempDir::new().unwrap();
    let p = orthogonal_pair(&dir);
    let o = sephide(&["ppt", "--ensemble", &p, "--format", "json", "--seed", "11"]);
    let v = json_of(&o);
    let prov = &v["provenance"];
    assert_eq!(prov["seed"], 11);
    assert_eq!(prov["tool"], "sephide-cli");
    let digest = hex::encode(Sha256::digest(std::fs::read(Path::new(&p)).unwrap()));
    assert_eq!(prov["input_sha256"], digest.as_str());
    assert!(prov["tolerances"]["dual_residual"].as_f64().is_some());
}

#[test]
fn seed_falls_back_to_env_then_zero() {
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_sephide"));
        cmd.args(["simulate", "example1", "--m", "0", "--trials", "10", "--format", "json"]);
        cmd.env_remove("SEED");
        if let Some(s) = env {
            cmd.env("SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        let o = cmd.output().unwrap();
        json_of(&o)["provenance"]["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, None), 0);
    assert_eq!(run(Some("42"), None), 42);
    assert_eq!(run(Some("42"), Some("5")), 5);
}

#[test]
fn export_round_trips_through_verify_inputs() {
    let o = sephide(&["export", "exampled", "--d", "3"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dA"], 3);
    assert_eq!(v["rho0"].as_array().unwrap().len(), 9);
    assert_eq!(o.stdout, sephide(&["export", "example1"]).stdout);
}
