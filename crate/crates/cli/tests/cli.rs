use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn srivc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srivc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap());
    }
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn simulate_into(dir: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = srivc(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn help_lists_every_config_key() {
    let o = srivc(&["--help"]);
    assert!(o.status.success());
    let help = stdout(&o);
    // Keys are taken from the schema itself: a default config serializes
    // every field.
    let keys = srivc_keys();
    assert!(!keys.is_empty());
    for k in keys {
        assert!(help.contains(&format!("  {k} ")), "--help lacks {k}");
    }
    for sub in ["simulate", "estimate", "diagnose", "sweep", "table1", "bias-snr"] {
        assert!(help.contains(sub));
    }
}

/// Field names of the config file, via a file that sets none of them and
/// the parser's rejection message for an unknown key.
fn srivc_keys() -> Vec<String> {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.toml");
    fs::write(&f, "definitely_not_a_key = 1\n").unwrap();
    let o = srivc(&["simulate", "--config", f.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    let tail = &msg[msg.find("expected one of").expect(&msg)..];
    // Every second backtick-delimited chunk is a field name.
    tail.split('`').skip(1).step_by(2).map(String::from).collect()
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("setting2.toml");
    fs::write(&cfg, "preset = \"paper-setting2\"\nn_samples = 800\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        simulate_into(d, &["--config", cfg.to_str().unwrap(), "--seed", "7"]);
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    assert!(sa.contains_key("manifest.json") && sa.contains_key("signals.csv"));
    assert_eq!(sa, sb);
    let manifest: serde_json::Value = serde_json::from_slice(&sa["manifest.json"]).unwrap();
    assert_eq!(manifest["seeds"]["seed"], 7);
    assert_eq!(manifest["config"]["n_samples"], 800);
}

#[test]
fn estimate_recovers_noise_free_truth_without_touching_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec");
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"preset": "paper-setting2", "n_samples": 2000, "sigma_v2": 0.0}"#).unwrap();
    simulate_into(&rec, &["--config", cfg.to_str().unwrap()]);
    let before = snapshot(&rec);
    for method in ["srivc", "clsrivc"] {
        let out = dir.path().join(format!("est-{method}"));
        let o = srivc(&[
            "estimate",
            "--method",
            method,
            "--record",
            rec.to_str().unwrap(),
            "--n",
            "2",
            "--m",
            "1",
            "--out",
            out.to_str().unwrap(),
            "--trace",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let res: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("estimate.json")).unwrap()).unwrap();
        let theta: Vec<f64> = res["theta"]["a"]
            .as_array()
            .unwrap()
            .iter()
            .chain(res["theta"]["b"].as_array().unwrap())
            .map(|v| v.as_f64().unwrap())
            .collect();
        for (t, s) in theta.iter().zip([0.707, 0.5, 0.5, -0.25]) {
            assert!((t - s).abs() < 1e-6, "{method}: {theta:?}");
        }
        assert!(out.join("trace.csv").exists());
        assert!(out.join("manifest.json").exists());
    }
    let d = dir.path().join("diag");
    let o = srivc(&["diagnose", "--record", rec.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("condition holds"));
    assert_eq!(before, snapshot(&rec));
}

#[test]
fn writing_into_the_record_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("rec");
    simulate_into(&rec, &["--n-samples", "500"]);
    let before = snapshot(&rec);
    let o = srivc(&["estimate", "--record", rec.to_str().unwrap(), "--out", rec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR config:"));
    assert_eq!(before, snapshot(&rec));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = srivc(&["estimate", "--record", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR missing-data:"), "{}", stderr(&o));

    let o = srivc(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR config:"));

    // An unstable loop is a violated numerical premise.
    let cfg = dir.path().join("unstable.toml");
    fs::write(
        &cfg,
        r#"
[scenario]
setting = 1
h = 0.1
n_samples = 100
sigma_r2 = 1.0
sigma_v2 = 0.01
seed = 1
plant = { num = [1.0], den = [1.0, 1.0], domain = "continuous" }
controller = { num = [-5.0], den = [1.0], domain = "continuous" }
"#,
    )
    .unwrap();
    let o = srivc(&["simulate", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("u").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(e.starts_with("ERROR closed-loop-unstable:") && e.contains("stability assumption"), "{e}");
}

#[test]
fn sweep_and_table_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sw");
    let o = srivc(&[
        "sweep",
        "--preset",
        "paper-setting2",
        "--runs",
        "2",
        "--sample-sizes",
        "300,600",
        "--out",
        out.to_str().unwrap(),
        "--jobs",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["fig4.csv", "fig4.svg", "fig4.json", "fig5.csv", "fig5.svg", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let csv = fs::read_to_string(out.join("fig4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let t = dir.path().join("t1");
    let o = srivc(&["table1", "--runs", "2", "--n-samples", "2000", "--out", t.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(t.join("table1.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("SRIVC,") && rows[2].starts_with("CLSRIVC,"));

    let b = dir.path().join("b");
    let o = srivc(&["bias-snr", "--runs", "1", "--snr-points", "2", "--n-samples", "3000", "--out", b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(b.join("fig6.svg").exists() && b.join("fig6.csv").exists());
}

#[test]
fn results_do_not_depend_on_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for jobs in ["1", "2"] {
        let out = dir.path().join(jobs);
        let o = srivc(&[
            "sweep", "--runs", "3", "--sample-sizes", "400", "--seed", "9", "--jobs", jobs, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        csvs.push(fs::read(out.join("fig4.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}
