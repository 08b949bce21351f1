use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use biasqec::{Bias, CodeFamily, DataRow, Dataset, FailureRates};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_biasqec"));
    // Keep the caller's environment from leaking overrides into tests.
    for (k, _) in std::env::vars() {
        if k.starts_with("BIASQEC_") {
            c.env_remove(k);
        }
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn error_line(o: &Output) -> serde_json::Value {
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    serde_json::from_str(err.trim()).unwrap()
}

#[test]
fn exact_prints_special_point_rates() {
    let o = run(&["exact", "--family", "xzzx", "--d", "5", "--eta", "30"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["P_f"].as_f64().unwrap() - 0.538381).abs() < 5e-6);
    assert!((v["P_fZ"].as_f64().unwrap() - 0.076763).abs() < 5e-6);
    assert_eq!(v["P_fX"].as_f64(), Some(0.5));
}

#[test]
fn hashing_at_infinite_bias() {
    let o = run(&["hashing", "--eta", "inf"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.5");
}

#[test]
fn validate_reports_pass() {
    let o = run(&["validate", "--family", "xz", "--d", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS"));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn usage_errors_are_one_json_line() {
    let o = run(&["hashing", "--eta", "inf", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "usage");

    let o = run(&["exact", "--family", "xzzx", "--d", "4", "--eta", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "invalid-distance");

    let o = run(&["hashing", "--eta", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let o = run(&["fit", "--input", "/nonexistent/data.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "io");
}

fn decode(json: &str, extra: &[&str]) -> Output {
    let mut child = bin()
        .arg("decode")
        .args(extra)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(json.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn decode_from_stdin() {
    let o = decode(r#"{"family":"xzzx","d":3,"eta":3,"p":0.1,"syndrome":"00010000"}"#, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let sum: f64 = ["I", "X", "Z", "Y"].iter().map(|k| v["probabilities"][k].as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert_eq!(v["class"], "I");

    let exact = decode(
        r#"{"family":"xzzx","d":3,"eta":3,"p":0.1,"syndrome":[0,0,0,1,0,0,0,0],"decoder":{"kind":"exact"}}"#,
        &[],
    );
    let w: serde_json::Value = serde_json::from_str(&stdout(&exact)).unwrap();
    for k in ["I", "X", "Z", "Y"] {
        let (a, b) = (v["probabilities"][k].as_f64().unwrap(), w["probabilities"][k].as_f64().unwrap());
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn decode_rejects_bad_syndromes() {
    let o = decode(r#"{"family":"xzzx","d":3,"eta":3,"p":0.1,"syndrome":"0001"}"#, &[]);
    assert_eq!(o.status.code(), Some(1));
    let o = decode(r#"{"family":"xzzx","d":3,"eta":3,"p":0.1,"syndrome":[0,2,0,0,0,0,0,0]}"#, &[]);
    assert_eq!(error_line(&o)["error"], "parse");
    let o = decode(r#"{"family":"repetition","d":5,"eta":3,"p":0.1,"syndrome":"0000"}"#, &["--chi", "4"]);
    assert_eq!(error_line(&o)["error"], "unsupported-family");
}

fn simulate(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "simulate", "--family", "xzzx", "--d", "3,5", "--eta", "10", "--p-min", "0.1", "--p-max", "0.2", "--dp", "0.05",
        "--samples", "300", "--seed", "11",
    ];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", out.to_str().unwrap()]);
    run(&args)
}

#[test]
fn simulate_is_reproducible_from_its_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let o = simulate(&a, &["--workers", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = dir.path().join("a.csv.manifest.json");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["config"]["master_seed"], 11);
    assert_eq!(m["config"]["decoder"]["chi"], 16);

    let b = dir.path().join("b.csv");
    let o = run(&[
        "simulate", "--manifest", manifest.to_str().unwrap(), "--workers", "3", "--out", b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ta, tb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(ta.lines().count(), 1 + 2 * 3);
    assert!(ta.starts_with("family,d,eta,p,chi,samples,seed,P_fX,P_fZ,P_fY,P_f,se_fX,se_fZ,se_fY,se_f\n"));
}

#[test]
fn environment_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.csv");
    let o = bin()
        .args(["simulate", "--d", "3", "--eta", "inf", "--p", "0.3", "--out", out.to_str().unwrap()])
        .env("BIASQEC_FAMILY", "xy")
        .env("BIASQEC_SAMPLES", "40")
        .env("BIASQEC_CHI", "4")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let data = Dataset::load(&out).unwrap();
    assert_eq!(data.rows.len(), 1);
    assert_eq!(data.rows[0].family, CodeFamily::Xy);
    assert_eq!(data.rows[0].samples, 40);
    assert_eq!(data.rows[0].chi, 4);
}

#[test]
fn exact_decoder_rows_have_zero_chi() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.csv");
    let o = run(&[
        "simulate", "--family", "repetition", "--d", "5", "--eta", "300", "--p", "0.4", "--decoder", "exact",
        "--samples", "200", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(Dataset::load(&out).unwrap().rows[0].chi, 0);

    let o = run(&[
        "simulate", "--family", "repetition", "--d", "5", "--eta", "300", "--p", "0.4", "--samples", "10", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(error_line(&o)["error"], "unsupported-family");
}

/// Rates from the scaling form, rounded onto whole counts.
fn scaling_dataset() -> Dataset {
    let mut rows = Vec::new();
    let samples = 100_000u64;
    for d in [7, 11, 15] {
        for i in 0..11 {
            let p = 0.16 + 0.004 * i as f64;
            let x = (p - 0.18) * (d as f64).powf(1.0 / 1.2);
            let pf = 0.3 + 1.5 * x + 0.5 * x * x;
            let n_fail = (pf * samples as f64).round() as u64;
            let n_z = n_fail / 3;
            let n_y = n_fail / 3;
            let rates = FailureRates::from_counts([samples - n_fail, n_fail - n_z - n_y, n_z, n_y]);
            rows.push(DataRow {
                family: CodeFamily::Xzzx,
                d,
                eta: Bias::DEPOLARIZING,
                p,
                chi: 16,
                samples,
                seed: 0,
                rates,
            });
        }
    }
    Dataset { rows }
}

#[test]
fn fit_writes_threshold_table() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("data.csv");
    scaling_dataset().write_csv(fs::File::create(&input).unwrap()).unwrap();
    let out = dir.path().join("fit.csv");
    let o = run(&[
        "fit", "--input", input.to_str().unwrap(), "--bins", "7,11,15", "--modes", "P_f", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin_center_d,mode,p_c,sigma_pc,nu,chi2_per_dof"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[..2], ["11", "P_f"]);
    let p_c: f64 = fields[2].parse().unwrap();
    assert!((p_c - 0.18).abs() < 1e-3, "{p_c}");
    assert!(dir.path().join("fit.csv.manifest.json").exists());

    // A bin without data warns on stderr and the other bins still report.
    let o = run(&["fit", "--input", input.to_str().unwrap(), "--bins", "7,11,15;11,15,19", "--modes", "P_f"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stderr(&o).contains("\"warning\":\"fit\""));
}

#[test]
fn plot_overlays_exact_values_at_the_special_point() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sp.csv");
    let p_s = 31.0 / 61.0;
    let p_list = format!("{},{},{}", p_s - 0.02, p_s, p_s + 0.02);
    let o = run(&[
        "simulate", "--family", "xzzx", "--d", "3,5", "--eta", "30", "--p", &p_list, "--samples", "100", "--out",
        data.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = dir.path().join("sp.svg");
    let o = run(&["plot", "--input", data.to_str().unwrap(), "--mode", "P_fZ", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert!(text.contains("exact at p_s"));
    assert!(text.contains("d = 3") && text.contains("d = 5"));
    assert!(dir.path().join("sp.svg.manifest.json").exists());

    let o = run(&["plot", "--input", data.to_str().unwrap(), "--eta", "3", "--out", svg.to_str().unwrap()]);
    assert_eq!(error_line(&o)["error"], "empty");
}
