use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qmg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmg")).args(args).output().expect("qmg runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn fixed_point_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "fp.json", r#"{"kind": "fixed-point", "parameters": {"sigma": 1}}"#);
    let out = dir.path().join("out");
    let o = qmg(&["run", &s, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("fixed_point.csv")).unwrap();
    assert!(text.starts_with("sigma,fixed_point,max_intensity\n1,"));
    let a: f64 = rows(&out.join("fixed_point.csv"))[0][1].parse().unwrap();
    assert!((a - 0.27603).abs() < 1e-5);

    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["kind"], "fixed-point");
    assert_eq!(manifest["outputs"][0]["file"], "fixed_point.csv");
    assert_eq!(manifest["seed"], 0);
    assert!(manifest["version"].is_string());
}

#[test]
fn delta_auction_short_form() {
    let dir = tempfile::tempdir().unwrap();
    for (pricing, revenue) in [("first", (-0.1f64).exp()), ("second", (-0.3f64).exp())] {
        let s = write(
            dir.path(),
            &format!("{pricing}.json"),
            &format!(
                r#"{{"buyers": ["delta(0.3)", "delta(0.1)"], "seller": "delta(-0.5)", "pricing": "{pricing}", "samples": 1000, "seed": 5}}"#
            ),
        );
        let o = qmg(&["run", &s]);
        assert!(o.status.success(), "{}", stderr(&o));
        let out = dir.path().join(format!("{pricing}-out"));
        let r = json(&out.join("auction.json"));
        assert_eq!(r["revenue_mean"].as_f64().unwrap(), revenue);
        assert_eq!(r["revenue_se"].as_f64().unwrap(), 0.0);
        assert_eq!(r["winner_freq"], serde_json::json!([0.0, 1.0]));
        assert_eq!(r["p_no_trade"].as_f64().unwrap(), 0.0);
        assert_eq!(r["exact"]["revenue_mean"].as_f64().unwrap(), revenue);
        let manifest = json(&out.join("manifest.json"));
        assert_eq!(manifest["seed"], 5);
        let files: Vec<_> = manifest["outputs"].as_array().unwrap().iter().map(|o| o["file"].clone()).collect();
        assert_eq!(files, vec!["auction.json", "histogram.csv"]);
    }
}

#[test]
fn mixed_pricing_blend() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "mixed.json",
        r#"{"kind": "auction", "parameters": {"buyers": ["delta(0.3)", "delta(0.1)"], "seller": "supply:delta(-0.5)", "pricing": "mixed", "weight": 0.25, "samples": 64}}"#,
    );
    assert!(qmg(&["run", &s]).status.success());
    let r = json(&dir.path().join("mixed-out/auction.json"));
    let expected = 0.25 * (-0.1f64).exp() + 0.75 * (-0.3f64).exp();
    assert!((r["revenue_mean"].as_f64().unwrap() - expected).abs() < 1e-15);
}

#[test]
fn zeno_eigenstate_survives() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "z.json",
        r#"{"kind": "zeno", "output": "zz", "parameters": {"strategy": "hermite(2)", "total_time": 0.5, "n_values": [1, 10, 100, 1000]}}"#,
    );
    assert!(qmg(&["run", &s]).status.success());
    let r = rows(&dir.path().join("zz/zeno.csv"));
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row[1] == "1"));
}

#[test]
fn zeno_crowd_frozen_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "z.json",
        r#"{"kind": "zeno", "parameters": {"strategy": "hermite(0)", "crowd": ["superpose(hermite(0), hermite(1))"], "omega_t": 3.141592653589793, "n_values": [1, 1000], "threshold": 0.99}}"#,
    );
    assert!(qmg(&["run", &s]).status.success());
    let r = rows(&dir.path().join("z-out/frozen.csv"));
    assert_eq!(r, vec![vec!["1".to_string(), "0.5".into()], vec!["1000".into(), "1".into()]]);
}

#[test]
fn seed_override_changes_monte_carlo_only() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "a.json",
        r#"{"buyers": ["gaussian(0, 1)", "gaussian(0, 1)"], "seller": "gaussian(0, 1)", "samples": 20000, "seed": 1}"#,
    );
    let run = |out: &str, seed: Option<&str>| {
        let out = dir.path().join(out);
        let mut args = vec!["run", &s, "--out", out.to_str().unwrap()];
        if let Some(seed) = seed {
            args.extend(["--seed", seed]);
        }
        assert!(qmg(&args).status.success());
        fs::read(out.join("histogram.csv")).unwrap()
    };
    let a = run("a", None);
    assert_eq!(a, run("b", None));
    assert_eq!(a, run("c", Some("1")));
    assert_ne!(a, run("d", Some("2")));
}

#[test]
fn parse_error_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "bad.json", "{\n  \"kind\": \"zeno\",\n  \"parameters\": {,}\n}");
    let o = qmg(&["run", &s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column"), "{}", stderr(&o));
}

#[test]
fn validation_errors_exit_3_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            r#"{"kind": "auction", "parameters": {"buyers": ["delta(0.1)", "gauss(1)"], "seller": "delta(0)"}}"#,
            "parameters.buyers[1]",
        ),
        (r#"{"buyers": ["delta(0.1)"], "seller": "delta(0)", "samples": -4}"#, "samples"),
        (
            r#"{"kind": "zeno", "parameters": {"strategy": "hermite(0)", "omega_t": 1, "n_values": [10, 5]}}"#,
            "parameters.n_values",
        ),
        (r#"{"kind": "thermal", "parameters": {"beta": 1, "risk": {"hbar_e": -1}}}"#, "parameters.risk"),
        (r#"{"kind": "fixed-point", "parameters": {"sigmas": [1, -2]}}"#, "parameters.sigmas[1]"),
        (r#"{"kind": "curves", "parameters": {"strategy": "hermite(1)", "bogus": 1}}"#, "parameters.bogus"),
        (r#"{"kind": "fixed-poynt"}"#, "kind"),
        (
            r#"{"kind": "auction", "parameters": {"buyers": ["delta(0.1)"], "seller": "delta(0)", "pricing": "mixed"}}"#,
            "parameters.weight",
        ),
        (
            r#"{"kind": "clearing", "parameters": {"traders": ["delta(0)", "delta(1)"], "policy": {"buyers": [0], "sellers": [0]}}}"#,
            "parameters.policy",
        ),
    ];
    for (i, (text, path)) in cases.iter().enumerate() {
        let s = write(dir.path(), &format!("v{i}.json"), text);
        let o = qmg(&["run", &s]);
        assert_eq!(o.status.code(), Some(3), "{text}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("`{path}`")), "{text}: {}", stderr(&o));
    }
}

#[test]
fn numerical_failure_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "c.json", r#"{"kind": "curves", "parameters": {"coherent": {"r": 1.0}}}"#);
    let o = qmg(&["run", &s]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical failure in wigner"));
}

#[test]
fn curves_and_plotdata() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "c.json",
        r#"{"kind": "curves", "parameters": {"coherent": {"r": 0.5, "eta": 0.8}, "n_p": 81, "n_q": 81}}"#,
    );
    assert!(qmg(&["run", &s]).status.success());
    let out = dir.path().join("c-out");
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["summary"]["giffen"], false);
    assert_eq!(manifest["summary"]["fd_monotone"], true);
    let head = fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(head.starts_with("p,q,w\n"));

    let csv = out.join("curves.csv");
    let o = qmg(&["plotdata", csv.to_str().unwrap(), "--x", "lnc", "--y", "Fd,Fs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let plot = json(&out.join("curves.plot.json"));
    let series = plot["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series[0]["name"], "Fd");
    assert_eq!(series[1]["name"], "Fs");
    assert_eq!(plot["x"]["label"], "ln c");
    assert_eq!(plot["hints"]["log_x"], false);
    assert_eq!(series[0]["x"].as_array().unwrap().len(), 81);

    let o = qmg(&["plotdata", csv.to_str().unwrap(), "--x", "lnc", "--y", "Fd,price"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`--y[1]`"), "{}", stderr(&o));
}

#[test]
fn zeno_plotdata_hints_log_axis() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "z.json",
        r#"{"kind": "zeno", "parameters": {"strategy": "superpose(hermite(0), hermite(1))", "omega_t": 1.5707963267948966}}"#,
    );
    assert!(qmg(&["run", &s]).status.success());
    let csv = dir.path().join("z-out/zeno.csv");
    let target = dir.path().join("plot.json");
    let o = qmg(&["plotdata", csv.to_str().unwrap(), "--x", "n", "--y", "survival", "--out", target.to_str().unwrap()]);
    assert!(o.status.success());
    let plot = json(&target);
    assert_eq!(plot["hints"]["log_x"], true);
    let y: Vec<f64> = plot["series"][0]["y"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(y.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn other_kinds_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("thermal", r#"{"beta": 2.0, "n": 31, "mode": "series", "levels": 60}"#, vec!["thermal.csv", "curves.csv"]),
        (
            "risk-spectrum",
            r#"{"levels": 3, "risk": {"hbar_e": 0.5, "theta_nc": 1.2}, "strategies": ["hermite(1)"]}"#,
            vec!["spectrum.csv", "expectations.csv"],
        ),
        (
            "clearing",
            r#"{"traders": ["delta(0.1)", "supply:delta(-0.4)"], "rounds": 5, "policy": {"buyers": [0], "sellers": [1]}, "rw_beta": 1.0, "cooling": [2, 1, 0.5]}"#,
            vec!["clearing_log.csv", "cooling.csv"],
        ),
    ];
    for (kind, params, files) in cases {
        let s = write(dir.path(), &format!("{kind}.json"), &format!(r#"{{"kind": "{kind}", "parameters": {params}}}"#));
        let o = qmg(&["run", &s]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        let out = dir.path().join(format!("{kind}-out"));
        let manifest = json(&out.join("manifest.json"));
        let listed: Vec<String> =
            manifest["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string()).collect();
        assert_eq!(listed, files);
        // every written file is listed
        let mut on_disk: Vec<String> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != "manifest.json")
            .collect();
        on_disk.sort();
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(on_disk, sorted);
    }
    let spectrum = rows(&dir.path().join("risk-spectrum-out/spectrum.csv"));
    // ħ_eff = √(0.25 + 1.44) = 1.3, ω = 1
    assert!((spectrum[0][1].parse::<f64>().unwrap() - 0.5 * 1.3).abs() < 1e-15);
    let log = fs::read_to_string(dir.path().join("clearing-out/clearing_log.csv")).unwrap();
    assert!(log.starts_with("round,trader,side,logprice,executed,flow\n"));
    assert_eq!(log.lines().count(), 1 + 5 * 2);
}

#[test]
fn shipped_scenarios_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let dir = tempfile::tempdir().unwrap();
    let mut count = 0;
    for entry in fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let out = dir.path().join(path.file_stem().unwrap());
        let o = qmg(&["run", path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), stderr(&o));
        let manifest = json(&out.join("manifest.json"));
        for f in manifest["outputs"].as_array().unwrap() {
            assert!(out.join(f["file"].as_str().unwrap()).exists());
        }
        count += 1;
    }
    assert_eq!(count, 8);
}
