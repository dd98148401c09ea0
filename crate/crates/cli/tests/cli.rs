use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn lsmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsmap"))
        .args(args)
        .env_remove("LSMAP_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Data rows of a CSV, skipping '#' comments and the column header.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    let k = header.split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    rows(csv).iter().map(|r| r[k]).collect()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lsmap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn exponent_at_zero_has_zero_row_sums() {
    let o = lsmap(&["exponent", "--alpha", "1.0", "--rho", "0.5", "--which", "F", "--z-real", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let r = &rows(&out)[0];
    assert_eq!(r.len(), 12);
    // m11 + m12 and m21 + m22, real and imaginary parts
    for (a, b) in [(2, 4), (3, 5), (6, 8), (7, 9)] {
        assert!((r[a] + r[b]).abs() < 1e-15, "{r:?}");
    }
}

#[test]
fn determinant_column_crosses_zero_at_alpha_minus_one() {
    let o = lsmap(&["exponent", "--alpha", "1.4", "--rho", "0.45", "--z-real", "0.3,0.4,0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let det = column(&stdout(&o), "det_re");
    assert!(det[0] * det[2] < 0.0, "{det:?}");
    assert!(det[1].abs() < 1e-12, "{det:?}");
}

#[test]
fn csv_carries_config_and_full_precision() {
    let o = lsmap(&["exponent", "--alpha", "0.8", "--rho", "0.5", "--z-real", "0.1", "--z-imag", "0.5"]);
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("# config: "), "{first}");
    let cfg: Value = serde_json::from_str(first.trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["params"]["alpha"], 0.8);
    assert_eq!(cfg["command"], "exponent");
    let data = out.lines().nth(2).unwrap();
    for field in data.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn malformed_rho_is_a_usage_error() {
    let o = lsmap(&["exponent", "--alpha", "1.5", "--rho", "0.9"]);
    assert_eq!(code(&o), 2);
    let msg = stderr(&o);
    assert!(msg.contains("admissible interval"), "{msg}");
    assert!(msg.contains("0.333"), "{msg}");
}

#[test]
fn strip_violation_names_the_strip() {
    let o = lsmap(&["exponent", "--alpha", "1.5", "--rho", "0.5", "--which", "F_circ", "--z-real", "1.2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("strip Re z in (-1.5, 1)"), "{}", stderr(&o));
    let bad_grid = lsmap(&["exponent", "--alpha", "1.5", "--rho", "0.5", "--z-real", "0:1"]);
    assert_eq!(code(&bad_grid), 2);
}

fn verify_records(args: &[&str]) -> (i32, Vec<Value>) {
    let o = lsmap(args);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|_| panic!("json: {}", stderr(&o)));
    assert_eq!(v["config"]["command"], "verify");
    (code(&o), v["records"].as_array().unwrap().clone())
}

#[test]
fn verify_small_alpha_identities_pass() {
    let (_, recs) = verify_records(&["verify", "--alpha", "0.8", "--rho", "0.5"]);
    let names: Vec<&str> = recs.iter().map(|r| r["name"].as_str().unwrap()).collect();
    for needed in ["phi1_two_routes", "hypergeometric_small_alpha", "killing_pattern", "esscher_circ"] {
        assert!(names.contains(&needed), "{names:?}");
    }
    for r in &recs {
        if r["name"] != "factorisation" {
            assert_eq!(r["passed"], true, "{r}");
        }
    }
}

// The full default suite, including the factorisation record.
#[test]
fn verify_default_grid_exits_zero() {
    let (c, recs) = verify_records(&["verify", "--alpha", "0.8", "--rho", "0.5"]);
    let failed: Vec<&Value> = recs.iter().filter(|r| r["passed"] != true).collect();
    assert_eq!(c, 0, "failed records: {failed:?}");
}

#[test]
fn verify_exit_code_follows_the_records() {
    let pass = ["verify", "--alpha", "1.5", "--rho", "0.5", "--only", "det_root,duality,hypergeometric_big_alpha"];
    let (c, recs) = verify_records(&pass);
    assert_eq!(c, 0);
    assert_eq!(recs.len(), 3);
    let hyp = recs.iter().find(|r| r["name"] == "hypergeometric_big_alpha").unwrap();
    assert!(hyp["grid"].as_str().unwrap().starts_with("lhs = 3.14159265358979"), "{hyp}");
    let (c, recs) = verify_records(&["verify", "--alpha", "1.5", "--rho", "0.5", "--only", "factorisation"]);
    assert_eq!(c, if recs[0]["passed"] == true { 0 } else { 1 });
    let unknown = lsmap(&["verify", "--alpha", "1.5", "--rho", "0.5", "--only", "phi1_two_routes"]);
    assert_eq!(code(&unknown), 2);
}

#[test]
fn unreachable_quadrature_tolerance_exits_three() {
    let o = lsmap(&["verify", "--alpha", "0.8", "--rho", "0.5", "--quad-tol", "1e-20"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("did not converge"), "{}", stderr(&o));
}

#[test]
fn identities_default_grids_pass() {
    let o = lsmap(&["identities"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 18);
    assert_eq!(lsmap(&["identities", "--alpha", "1.0", "--rho", "0.5"]).status.code(), Some(2));
}

#[test]
fn factors_at_zero_and_killing_patterns() {
    let o = lsmap(&["factors", "--alpha", "0.8", "--rho", "0.4", "--lambda", "0,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let at = |c: &str| column(&out, c)[0];
    assert!(at("phi_1").abs() < 1e-12 && at("phi_2").abs() < 1e-12);
    assert!((at("k_12") - 1.0).abs() < 1e-12 && (at("k_21") - 1.0).abs() < 1e-12);
    assert!((at("kappa_11") + at("kappa_12")).abs() < 1e-12);
    assert!((at("kappa_21") + at("kappa_22")).abs() < 1e-12);
    assert!(at("kappa_hat_11") + at("kappa_hat_12") > 1e-9);
    assert!(at("kappa_hat_21") + at("kappa_hat_22") > 1e-9);

    let o = lsmap(&["factors", "--alpha", "1.5", "--rho", "0.4", "--lambda", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let at = |c: &str| column(&out, c)[0];
    assert!(at("kappa_11") + at("kappa_12") > 1e-9);
    assert!(at("kappa_21") + at("kappa_22") > 1e-9);
    assert!((at("kappa_hat_11") + at("kappa_hat_12")).abs() < 1e-12);
    assert!((at("kappa_hat_21") + at("kappa_hat_22")).abs() < 1e-12);

    assert_eq!(code(&lsmap(&["factors", "--alpha", "0.8", "--rho", "0.4", "--lambda", "-1"])), 2);
}

#[test]
fn config_file_with_flag_override() {
    let path = tmp("run.toml");
    std::fs::write(&path, "alpha = 0.8\nrho = 0.5\n[factors]\nlambda = \"0,2\"\n").unwrap();
    let p = path.to_str().unwrap();
    let o = lsmap(&["factors", "--config", p, "--rho", "0.4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let cfg: Value = serde_json::from_str(out.lines().next().unwrap().trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["params"]["rho"], 0.4);
    assert_eq!(cfg["lambda"], serde_json::json!([0.0, 2.0]));
    std::fs::write(&path, "alpha = 0.8\nrh0 = 0.5\n").unwrap();
    assert_eq!(code(&lsmap(&["factors", "--config", p])), 2);
}

fn simulate(extra: &[&str], csv: &PathBuf, summary: &PathBuf, workers: Option<&str>) -> (i32, String, Value) {
    let mut args = vec![
        "simulate",
        "--output",
        csv.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lsmap"));
    cmd.args(&args).env_remove("LSMAP_WORKERS");
    if let Some(w) = workers {
        cmd.env("LSMAP_WORKERS", w);
    }
    let o = cmd.output().unwrap();
    let c = code(&o);
    assert!(c == 0 || c == 1, "exit {c}: {}", stderr(&o));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(summary).unwrap()).unwrap();
    (c, std::fs::read_to_string(csv).unwrap(), s)
}

#[test]
fn simulate_is_reproducible_across_runs_and_workers() {
    let small = [
        "two-sided-exit",
        "--alpha",
        "1.2",
        "--rho",
        "0.5",
        "--n-paths",
        "5000",
        "--time-step",
        "1e-3",
        "--seed",
        "5",
    ];
    let (_, a, sa) = simulate(&small, &tmp("a.csv"), &tmp("a.json"), Some("1"));
    // Same paths, since the paths are part of the recorded config.
    let (_, b, _) = simulate(&small, &tmp("a.csv"), &tmp("a.json"), Some("1"));
    let (_, c, sc) = simulate(&small, &tmp("c.csv"), &tmp("c.json"), Some("3"));
    assert_eq!(a, b);
    assert_eq!(sa["config"]["mc"]["n_workers"], 1);
    assert_eq!(sc["config"]["mc"]["n_workers"], 3);
    // Only the recorded worker count may differ.
    assert_eq!(a.lines().skip(1).collect::<Vec<_>>(), c.lines().skip(1).collect::<Vec<_>>());
    assert_eq!(sa["summary"], sc["summary"]);
    let header = a.lines().nth(2).unwrap();
    assert_eq!(header, "bin_left,bin_right,count,density,analytic_density");
}

#[test]
fn simulate_two_sided_exit_meets_ks_bound() {
    let extra = ["two-sided-exit", "--alpha", "0.8", "--rho", "0.5", "--x", "0.3", "--seed", "3"];
    let (c, csv, s) = simulate(&extra, &tmp("ks.csv"), &tmp("ks.json"), None);
    let ks = s["summary"]["ks_max"].as_f64().unwrap();
    assert!(ks <= 0.02, "KS {ks}");
    assert_eq!(c, 0);
    // Histogram mass against the closed form, bin by bin.
    let rows = rows(&csv);
    let width = rows[0][1] - rows[0][0];
    let mc: f64 = rows.iter().map(|r| r[3] * width).sum();
    let exact: f64 = rows.iter().map(|r| r[4] * width).sum();
    assert!((mc - exact).abs() < 0.02, "{mc} vs {exact}");
}

#[test]
fn simulate_ladder_and_its_errors() {
    let extra = [
        "ladder-overshoot",
        "--alpha",
        "0.7",
        "--rho",
        "0.5",
        "--n-paths",
        "4000",
        "--time-step",
        "1e-3",
        "--ks-bound",
        "0.06",
    ];
    let (c, _, s) = simulate(&extra, &tmp("l.csv"), &tmp("l.json"), None);
    assert_eq!(c, 0, "{s}");
    assert!(s["summary"]["state_probabilities"]["state_1"]["z_score"].as_f64().unwrap() < 4.0);

    let killed = lsmap(&["simulate", "ladder-overshoot", "--alpha", "1.5", "--rho", "0.5", "--n-paths", "10"]);
    assert_eq!(code(&killed), 2);
    let mut bad_env = Command::new(env!("CARGO_BIN_EXE_lsmap"));
    bad_env.args(["simulate", "two-sided-exit", "--alpha", "0.8", "--rho", "0.5", "--n-paths", "10"]);
    assert_eq!(bad_env.env("LSMAP_WORKERS", "zero").output().unwrap().status.code(), Some(2));
    let budget = lsmap(&[
        "simulate",
        "two-sided-exit",
        "--alpha",
        "0.8",
        "--rho",
        "0.5",
        "--n-paths",
        "10",
        "--step-cap",
        "2",
        "--x",
        "0",
    ]);
    assert_eq!(code(&budget), 3);
    assert_eq!(code(&lsmap(&["simulate", "--alpha", "0.8", "--rho", "0.5"])), 2);
}
