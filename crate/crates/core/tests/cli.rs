use std::path::Path;
use std::process::Command;

use berezin_kit::cli::run;
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("berezin-kit").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn cs_check_exit_codes() {
    let (code, out, _) = call(&[
        "cs-check", "--gamma", "2", "--phi0", "0.3", "--phi1", "0.4", "--n", "1", "--json",
    ]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["verdict"], "pass");
    assert!(r["defect"].as_f64().unwrap() < 1e-9);

    let (code, out, _) = call(&[
        "cs-check",
        "--gamma",
        "2",
        "--phi0",
        "0.3",
        "--phi1",
        "0.4",
        "--n",
        "1",
        "--perturb",
        "--json",
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["verdict"], "fail");

    let (code, _, err) = call(&["cs-check", "--phi0", "0.9", "--phi1", "0.9"]);
    assert_eq!(code, 64);
    assert!(err.contains("margin"), "{err}");

    let (code, _, _) = call(&["cs-check", "--family", "rotation", "--xi", "2"]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&[
        "cs-check", "--family", "rotation", "--xi", "i", "--mu", "-1", "--phi0", "0.2", "--phi1", "0.3+0.1i",
        "--coeffs", "1,0.5i",
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = call(&["cs-check", "--alpha", "zzz", "--phi0", "x"]);
    assert_eq!(code, 64);
}

#[test]
fn sa_check_families() {
    let (code, _, _) = call(&[
        "sa-check", "--phi0", "0.3+0.2i", "--phi1", "0.4", "--n", "1", "--a", "-2",
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = call(&["sa-check", "--phi0", "0.3+0.2i", "--phi1", "0.4i"]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&[
        "sa-check",
        "--family",
        "hermitian",
        "--phi0",
        "0.3i",
        "--phi1",
        "0.3",
        "--coeffs",
        "1,-0.5",
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = call(&[
        "sa-check",
        "--family",
        "hermitian",
        "--phi0",
        "0.3i",
        "--phi1",
        "0.3",
        "--coeffs",
        "1,-0.5",
        "--perturb",
        "0.2",
    ]);
    assert_eq!(code, 1);
    let (code, _, _) = call(&["sa-check", "--family", "nope"]);
    assert_eq!(code, 64);
}

#[test]
fn record_fields_are_pinned() {
    let (_, out, _) = call(&["cs-check", "--json", "--no-timing"]);
    let r = json(&out);
    let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["theorem", "params", "defect", "verdict", "runtime_ms", "seed"] {
        assert!(keys.contains(&k), "missing {k} in {keys:?}");
    }
    assert_eq!(r["runtime_ms"], 0.0);
}

#[test]
fn berezin_csv_golden_header_and_trivial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let (code, _, _) = call(&["berezin", "--alpha", "0", "--grid", "5,12", "--out", path_str(&csv)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("w_re,w_im,ber_re,ber_im"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 60);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 4);
        assert_eq!((f[2], f[3]), ("1", "0"), "{row}");
    }
}

#[test]
fn berezin_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let svg = dir.path().join(format!("{tag}.svg"));
        let sum = dir.path().join(format!("{tag}.json"));
        let (code, out, _) = call(&[
            "berezin",
            "--gamma",
            "2",
            "--alpha",
            "0.5",
            "--grid",
            "40,64",
            "--out",
            path_str(&csv),
            "--svg",
            path_str(&svg),
            "--summary",
            path_str(&sum),
            "--json",
        ]);
        assert_eq!(code, 0);
        (
            std::fs::read(&csv).unwrap(),
            std::fs::read(&svg).unwrap(),
            std::fs::read_to_string(&sum).unwrap(),
            out,
        )
    };
    let a = run_once("a");
    let b = run_once("b");
    assert_eq!(a, b);
    assert_eq!(a.2, a.3);
    let summary = json(&a.2);
    assert_eq!(summary["summary"]["samples"], 2560);
    for k in ["min_modulus", "max_modulus", "real_slice", "hole"] {
        assert!(summary["summary"].get(k).is_some(), "{k}");
    }
    let svg = String::from_utf8(a.1).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("viewBox=\"0 0 1 1\""));
    assert_eq!(svg.matches("<circle").count(), 2560);
    // every CSV value survives a text round trip
    let csv = String::from_utf8(a.0).unwrap();
    for row in csv.lines().skip(1).take(200) {
        for field in row.split(',') {
            let x: f64 = field.parse().unwrap();
            assert_eq!(berezin_kit::cli::format::g17(x), field);
        }
    }
}

#[test]
fn berezin_errors() {
    let (code, _, err) = call(&[
        "berezin",
        "--alpha",
        "0.5",
        "--grid",
        "3,4",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert_eq!(code, 74, "{err}");
    let (code, _, _) = call(&["berezin", "--alpha", "1.5"]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&["berezin", "--grid", "1,4"]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&["berezin", "--json", "--grid", "3,4"]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&[
        "berezin", "--source", "matrix", "--beta", "0.5", "--grid", "3,4", "--rmax", "0.999", "--N", "8",
    ]);
    assert_eq!(code, 2);
    let (code, out, _) = call(&["berezin", "--source", "elliptic", "--beta", "-0.5", "--grid", "3,4"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 13);
}

#[test]
fn numrange_and_nonconvexity() {
    let (code, out, _) = call(&["numrange", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["theorem"], "berezin-in-numerical-range");
    let (code, out, _) = call(&["numrange", "--source", "decay", "--json"]);
    assert_eq!(code, 0);
    assert!(json(&out)["defect"].as_f64().unwrap() < 0.01);
    let (code, _, _) = call(&["numrange", "--source", "decay", "--radii", "0.9999,0.9"]);
    assert_eq!(code, 1);
    let (code, _, _) = call(&["numrange", "--source", "decay", "--coeffs", "1"]);
    assert_eq!(code, 64);

    let (code, out, _) = call(&["certify-nonconvex", "--alpha", "0.5", "--json"]);
    assert_eq!(code, 0);
    assert!(json(&out)["details"]["gap"].as_f64().unwrap() > 0.0);
    let (code, out, _) = call(&["certify-nonconvex", "--alpha", "0", "--json"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["details"]["message"], "convex: range = {1}");
    let (code, _, _) = call(&["certify-nonconvex"]);
    assert_eq!(code, 64);
    let (code, out, _) = call(&["certify-nonconvex", "--alpha", "0.5", "--angles", "1"]);
    assert_eq!(code, 2, "{out}");
}

#[test]
fn config_file_and_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"gamma": 2, "phi0": [0.3], "phi1": "0.4", "n": [1], "perturb": 0.1}"#,
    )
    .unwrap();
    let (code, out, _) = call(&["cs-check", "--config", path_str(&cfg), "--json"]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["params"]["gamma"], 2);
    let (code, out, _) = call(&[
        "cs-check",
        "--config",
        path_str(&cfg),
        "--gamma",
        "3",
        "--perturb",
        "0",
        "--json",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["params"]["gamma"], 3);

    std::fs::write(&cfg, r#"{"gama": 2}"#).unwrap();
    let (code, _, _) = call(&["cs-check", "--config", path_str(&cfg)]);
    assert_eq!(code, 64);
    let (code, _, _) = call(&["cs-check", "--config", path_str(&dir.path().join("missing.json"))]);
    assert_eq!(code, 74);
}

#[test]
fn report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r.json");
    let (code, out, _) = call(&["report", "--json", "--no-timing", "--out", path_str(&file)]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&file).unwrap(), out);
    let report: berezin_kit::report::Report = serde_json::from_str(&out).unwrap();
    assert_eq!(report.failed + report.inconclusive, 0);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", out);
    let (code, again, _) = call(&["report", "--json", "--no-timing"]);
    assert_eq!(code, 0);
    assert_eq!(again, out);
    let (code, _, _) = call(&["report", "--perturb"]);
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(call(&["bogus"]).0, 64);
    assert_eq!(call(&[]).0, 64);
    assert_eq!(call(&["cs-check", "--gamma", "x"]).0, 64);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    for cmd in [
        "cs-check",
        "sa-check",
        "berezin",
        "numrange",
        "certify-nonconvex",
        "report",
    ] {
        assert!(out.contains(cmd), "{cmd}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_berezin-kit");
    let status = Command::new(bin)
        .args(["cs-check", "--phi0", "0.3", "--phi1", "0.4"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    let status = Command::new(bin)
        .args(["cs-check", "--phi0", "0.3", "--phi1", "0.4", "--perturb"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    let status = Command::new(bin).args(["cs-check", "--gamma", "0"]).output().unwrap();
    assert_eq!(status.status.code(), Some(64));
    assert!(!status.stderr.is_empty());
}
