//! End-to-end tests of the `rmmcop` binary: exit codes, output shapes, and
//! reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rmmcop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmmcop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn write_generator_file(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().to_string()
}

#[test]
fn validate_preset_passes() {
    let out = rmmcop(&["validate", "--preset", "w"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"pass\": true"));
}

#[test]
fn validate_condition_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // f(t) = t^2 violates (G3) (and (G1), since f(1) = 1)
    let file = write_generator_file(
        dir.path(),
        "tsq.json",
        r#"{"version":1,"zero_limit":0.0,"pieces":[{"from":0.0,"to":1.0,"coeffs":[0.0,0.0,1.0]}]}"#,
    );
    let out = rmmcop(&["validate", "--file-f", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("\"g3\":{\"passed\":false"));
    // f(t) = t^2 (1 - t) fails exactly (G3): f/t = t(1-t) rises near 0
    let file = write_generator_file(
        dir.path(),
        "g3only.json",
        r#"{"version":1,"zero_limit":0.0,"pieces":[{"from":0.0,"to":1.0,"coeffs":[0.0,0.0,1.0,-1.0]}]}"#,
    );
    let out = rmmcop(&["validate", "--file-f", &file]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("(G3)"), "stderr: {err}");
}

#[test]
fn validate_malformed_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_generator_file(
        dir.path(),
        "gap.json",
        r#"{"version":1,"zero_limit":0.0,"pieces":[
            {"from":0.0,"to":0.4,"coeffs":[0.0,1.0]},
            {"from":0.5,"to":1.0,"coeffs":[1.0,-1.0]}]}"#,
    );
    let out = rmmcop(&["validate", "--file-f", &file]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_exits_two() {
    let out = rmmcop(&["eval", "--preset", "nope", "--u", "0.5", "--v", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_prints_twelve_digit_value() {
    let out = rmmcop(&["eval", "--preset", "efgm:a=0.5", "--u", "0.5", "--v", "0.5"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "0.234375");
    // maxmin evaluation of the reflected W preset is min(u, v)
    let out = rmmcop(&[
        "eval", "--preset", "w", "--maxmin", "--u", "0.3", "--v", "0.7",
    ]);
    assert_eq!(stdout(&out).trim(), "0.3");
}

#[test]
fn volume_and_density() {
    let out = rmmcop(&[
        "volume", "--preset", "pi", "--u1", "0", "--u2", "1", "--v1", "0", "--v2", "1",
    ]);
    assert_eq!(stdout(&out).trim(), "1");
    let out = rmmcop(&[
        "density",
        "--preset",
        "efgm:a=0.5",
        "--u",
        "0.5",
        "--v",
        "0.5",
    ]);
    assert_eq!(stdout(&out).trim(), "1");
}

#[test]
fn mass_reports_closed_form() {
    let out = rmmcop(&["mass", "--preset", "ex3b:delta=1/3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"singular_mass\": 0.462098120373"), "{text}");
}

#[test]
fn levelset_boundary_curve() {
    let out = rmmcop(&["levelset", "--preset", "ex3c:mu=1", "--t", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,v"));
    for line in lines.take(20) {
        let mut cols = line.split(',');
        let u: f64 = cols.next().unwrap().parse().unwrap();
        let v: f64 = cols.next().unwrap().parse().unwrap();
        assert!((v - (1.0 - u) / (2.0 - u)).abs() < 1e-9);
    }
    // positive level: points satisfy uv = t for the product copula
    let out = rmmcop(&["levelset", "--preset", "pi", "--t", "0.25", "--n", "64"]);
    for line in stdout(&out).lines().skip(1) {
        let mut cols = line.split(',');
        let u: f64 = cols.next().unwrap().parse().unwrap();
        let v: f64 = cols.next().unwrap().parse().unwrap();
        assert!((u * v - 0.25).abs() < 1e-9);
    }
}

#[test]
fn diagonal_membership_verdict() {
    let out = rmmcop(&["diagonal", "--preset", "w", "--check-dhat"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("member of D-hat"));
    let out = rmmcop(&["diagonal", "--preset", "ex5asym", "--check-dhat"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("not in D-hat"));
}

#[test]
fn diagonal_file_roundtrip_and_srmm() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_generator_file(
        dir.path(),
        "dw.json",
        r#"{"version":1,"delta_pieces":[
            {"from":0.0,"to":0.5,"coeffs":[0.0]},
            {"from":0.5,"to":1.0,"coeffs":[-1.0,2.0]}]}"#,
    );
    let out = rmmcop(&["diagonal", "--diagonal-file", &file, "--srmm"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("a_delta: 0.5"));
    assert!(text.contains("reconstructed symmetric generator"));
}

#[test]
fn sample_is_reproducible_and_flagged() {
    let a = rmmcop(&["sample", "--preset", "w", "--n", "200", "--seed", "9"]);
    let b = rmmcop(&["sample", "--preset", "w", "--n", "200", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("u,v,singular"));
    for line in lines {
        assert!(line.ends_with(",1")); // every W draw is singular
    }
}

#[test]
fn sample_writes_metadata_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    let out = rmmcop(&[
        "sample",
        "--preset",
        "efgm:a=0.5",
        "--n",
        "50",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let meta_path = dir.path().join("draws.meta.json");
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(meta_path).unwrap()).unwrap();
    assert_eq!(meta["n"], 50);
    assert_eq!(meta["seed"], 3);
    assert_eq!(meta["source"], "efgm:a=0.5");
    assert!(meta["rng"].as_str().unwrap().contains("chacha12"));
    let csv = fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn figures_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = rmmcop(&[
        "figures",
        "--n",
        "64",
        "--seed",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["datasets"].as_array().unwrap().len(), 12);
    for k in ["fig1-1", "fig1-6", "fig2-3", "fig2-6"] {
        let csv = fs::read_to_string(dir.path().join(format!("{k}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 65, "{k}");
        assert!(dir.path().join(format!("{k}.meta.json")).exists());
    }
    // n = 0 writes headers only
    let dir2 = tempfile::tempdir().unwrap();
    let out = rmmcop(&[
        "figures",
        "--n",
        "0",
        "--seed",
        "1",
        "--out",
        dir2.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir2.path().join("fig1-1.csv")).unwrap();
    assert_eq!(csv, "u,v,singular\n");
}

#[test]
fn recover_from_sampled_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("tent.csv");
    let out = rmmcop(&[
        "sample",
        "--preset",
        "tent",
        "--n",
        "20000",
        "--seed",
        "5",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rec_path = dir.path().join("rec.csv");
    let out = rmmcop(&[
        "recover",
        "--samples",
        csv_path.to_str().unwrap(),
        "--grid",
        "20",
        "--out",
        rec_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((summary["u_min"].as_f64().unwrap() - 0.5).abs() < 0.02);
    let rec = fs::read_to_string(rec_path).unwrap();
    let mut lines = rec.lines();
    assert_eq!(lines.next(), Some("u,f_u,valid"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        if cols[2] == "1" {
            let u: f64 = cols[0].parse().unwrap();
            let f: f64 = cols[1].parse().unwrap();
            if (0.55..=0.95).contains(&u) {
                assert!((f - u.min(1.0 - u)).abs() < 0.05, "u={u} f={f}");
            }
        }
    }
}

#[test]
fn recover_analytic_preset() {
    let out = rmmcop(&["recover", "--preset", "w", "--grid", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().next().unwrap() == "u,f_u,valid");
    // u = 0.5 row recovers f = 0.5
    assert!(text.contains("0.5,0.5,1"), "{text}");
    // product copula needs no anchor
    let out = rmmcop(&["recover", "--preset", "pi", "--grid", "5"]);
    assert!(out.status.success());
    // EFGM needs the scale-fixed route
    let out = rmmcop(&["recover", "--preset", "efgm:a=0.5", "--grid", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = rmmcop(&[
        "recover",
        "--preset",
        "efgm:a=0.5",
        "--grid",
        "10",
        "--scaled",
    ]);
    assert!(out.status.success());
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"preset": "efgm:a=0.5", "u": 0.5, "v": 0.5}"#).unwrap();
    let out = rmmcop(&["--config", cfg.to_str().unwrap(), "eval"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(stdout(&out).trim(), "0.234375");
    // explicit flag overrides the config value
    let out = rmmcop(&["--config", cfg.to_str().unwrap(), "eval", "--u", "1.0"]);
    assert_eq!(stdout(&out).trim(), "0.5");
}

#[test]
fn help_lists_presets() {
    let out = rmmcop(&["--help"]);
    let text = stdout(&out);
    for key in ["w", "efgm", "ex3a", "ex3b", "ex3c", "tent", "fig2-6"] {
        assert!(text.contains(key), "help misses {key}");
    }
}
