use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_photon-tails"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap()).unwrap()
}

fn records(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

const THERMAL: &str = r#"
pulses = 1_000_000
master_seed = 42

[spec]
spec_version = 1
source = "thermal"
mean = 1.33e5

[analyses]
gm = [2, 3]
ccdf = true
hazard = true
ks = true
histogram = { binning = "log", bins_per_decade = 10 }
"#;

#[test]
fn simulate_prints_the_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", THERMAL);
    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("t.pstn")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let mean = summary["mean"].as_f64().unwrap();
    assert!((mean / 1.33e5 - 1.0).abs() < 0.005, "{mean}");
    for key in ["variance", "min", "max"] {
        assert!(summary[key].is_number());
    }
}

#[test]
fn zero_pulses_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", &THERMAL.replace("1_000_000", "0"));
    let target = dir.path().join("t.ndjson");
    let out = run(&["simulate", "--config", s(&cfg), "--out", s(&target)]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["exit_code"], 2);
    assert!(err["message"].as_str().unwrap().contains("pulses"));
    assert!(!target.exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &THERMAL
            .replace("1_000_000", "200_000")
            .replace("mean = 1.33e5", "mean = 1.33e5\nnoise_sigma = 1600.0"),
    );
    for ext in ["pstn", "ndjson", "csv"] {
        let a = dir.path().join(format!("a.{ext}"));
        let b = dir.path().join(format!("b.{ext}"));
        assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&a)])
            .status
            .success());
        assert!(run(&[
            "--threads",
            "3",
            "simulate",
            "--config",
            s(&cfg),
            "--out",
            s(&b)
        ])
        .status
        .success());
        assert_eq!(
            std::fs::read(&a).unwrap(),
            std::fs::read(&b).unwrap(),
            "{ext}"
        );
    }
    let c = dir.path().join("c.pstn");
    assert!(run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&c),
        "--seed",
        "7"
    ])
    .status
    .success());
    assert_ne!(
        std::fs::read(dir.path().join("a.pstn")).unwrap(),
        std::fs::read(&c).unwrap()
    );

    let (r1, r2) = (dir.path().join("r1.ndjson"), dir.path().join("r2.ndjson"));
    let train = dir.path().join("a.pstn");
    assert!(run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&r1)
    ])
    .status
    .success());
    assert!(run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&r2)
    ])
    .status
    .success());
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn explicit_format_overrides_the_extension() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &THERMAL.replace("1_000_000", "1000"),
    );
    let out = dir.path().join("t.dat");
    assert!(run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--format",
        "binary"
    ])
    .status
    .success());
    assert_eq!(&std::fs::read(&out).unwrap()[..4], b"PSTN");
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            s(&cfg),
            "--out",
            s(&out),
            "--format",
            "xml"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn analyze_thermal_train() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", THERMAL);
    let train = dir.path().join("t.pstn");
    let report = dir.path().join("report.ndjson");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&train)])
        .status
        .success());
    let out = run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let recs = records(&report);
    assert_eq!(recs[0]["type"], "meta");
    assert_eq!(recs[0]["master_seed"], 42);
    assert_eq!(recs[0]["pulses"], 1_000_000);
    let gm: Vec<&Value> = recs.iter().filter(|r| r["type"] == "gm").collect();
    assert_eq!(gm.len(), 2);
    let g2 = gm[0]["estimate"]["value"].as_f64().unwrap();
    let g3 = gm[1]["estimate"]["value"].as_f64().unwrap();
    assert!((g2 - 2.0).abs() < 0.05, "{g2}");
    assert!((g3 - 6.0).abs() < 0.3, "{g3}");
    assert_eq!(gm[0]["theory"], 2.0);
    let ks = recs.iter().find(|r| r["type"] == "ks").unwrap();
    assert!(ks["statistic"].as_f64().unwrap() < 0.005);
    for kind in ["histogram", "ccdf", "hazard"] {
        assert!(recs.iter().any(|r| r["type"] == kind), "{kind}");
    }
    assert!(!recs.iter().any(|r| r["type"] == "error"));

    for suffix in ["histogram", "ccdf", "hazard", "gm"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("report.{suffix}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap().split(',').count(), 2);
        assert!(
            lines.all(|l| l.split(',').all(|f| f.parse::<f64>().is_ok())),
            "{suffix}"
        );
    }
    let hazard = std::fs::read_to_string(dir.path().join("report.hazard.csv")).unwrap();
    assert!(hazard.starts_with("n,h_over_n\n"));
}

#[test]
fn analyze_fwm_tail_fit() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        r#"
pulses = 1_000_000
master_seed = 3

[spec]
spec_version = 1
source = "fwm-superbunched"
kappa_np = 2.5
modes = 2

[detector]
noise_sigma = 270.0
saturation = 1e6

[analyses]
tailfit = { method = "both", lo = 1e4, hi = 8e5 }
ks = true
"#,
    );
    let train = dir.path().join("t.ndjson");
    let report = dir.path().join("r.ndjson");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&train)])
        .status
        .success());
    let out = run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&report),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = records(&report);
    let fits: Vec<&Value> = recs.iter().filter(|r| r["type"] == "tailfit").collect();
    assert_eq!(fits.len(), 2);
    let reg = &fits[0]["fit"];
    assert_eq!(reg["method"], "ccdf-regression");
    assert_eq!(reg["fit_lo"], 1e4);
    assert_eq!(reg["fit_hi"], 8e5);
    assert!(reg["k_stderr"].as_f64().unwrap() > 0.0);
    let k = reg["k"].as_f64().unwrap();
    assert!((k - 0.2).abs() < 0.05, "{k}");
    assert_eq!(fits[0]["k_theory"], 0.2);
    assert!(recs.iter().any(|r| r["type"] == "tailfit-comparison"));
    // the detector changed the law, so ks is reported as an error record
    let err = recs.iter().find(|r| r["type"] == "error").unwrap();
    assert_eq!(err["analysis"], "ks");
    assert_eq!(err["kind"], "unsupported");
}

#[test]
fn failing_analysis_does_not_abort_the_rest() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", &THERMAL.replace("1_000_000", "500"));
    let train = dir.path().join("t.csv");
    let report = dir.path().join("r.ndjson");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&train)])
        .status
        .success());
    assert!(run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&report)
    ])
    .status
    .success());
    let recs = records(&report);
    let err = recs.iter().find(|r| r["type"] == "error").unwrap();
    assert_eq!(err["analysis"], "hazard");
    assert_eq!(err["kind"], "insufficient-data");
    assert!(recs.iter().any(|r| r["type"] == "ks"));
    assert_eq!(recs.iter().filter(|r| r["type"] == "gm").count(), 2);
}

#[test]
fn corrupt_train_exits_3_without_a_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &THERMAL.replace("1_000_000", "5000"),
    );
    let train = dir.path().join("t.pstn");
    assert!(run(&["simulate", "--config", s(&cfg), "--out", s(&train)])
        .status
        .success());
    let mut bytes = std::fs::read(&train).unwrap();
    bytes[0] = b'X';
    std::fs::write(&train, &bytes).unwrap();
    let report = dir.path().join("r.ndjson");
    let out = run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "format");
    assert!(!report.exists());
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .starts_with("r.")));

    // truncated body
    bytes[0] = b'P';
    std::fs::write(&train, &bytes[..bytes.len() / 2]).unwrap();
    let out = run(&[
        "analyze",
        "--train",
        s(&train),
        "--config",
        s(&cfg),
        "--out",
        s(&report),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!report.exists());
}

#[test]
fn out_of_order_pipeline_is_rejected() {
    let dir = TempDir::new().unwrap();
    let body = THERMAL.replace("1_000_000", "1000")
        + "\n[[stages]]\nkind = \"loss\"\neta = 0.5\n\n[[stages]]\nkind = \"harmonic\"\norder = 2\nconversion = 1.0\n";
    let cfg = write(dir.path(), "run.toml", &body);
    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("t.pstn")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "ordering");

    let cfg = write(
        dir.path(),
        "bad.toml",
        &THERMAL.replace("gm = [2, 3]", "gm = [2, 3]\ntailfit = { lo = 5.0 }"),
    );
    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("t.pstn")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("analyses.tailfit"));
}

#[test]
fn gain_overflow_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "pulses = 100000\nmaster_seed = 1\n[spec]\nspec_version = 1\nsource = \"fwm-thermal\"\nkappa_np = 100.0\n",
    );
    let out = run(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("t.pstn")),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"], "range");
}

#[test]
fn usage_errors_are_json() {
    let out = run(&["simulate", "--out", "x.pstn"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "usage");
    assert_eq!(
        run(&["--threads", "0", "reproduce", "table1", "--out", "."])
            .status
            .code(),
        Some(2)
    );
    assert!(run(&["--help"]).status.success());
}

#[test]
fn reproduce_smoke() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "reproduce",
        "table1",
        "--out",
        s(dir.path()),
        "--pulses",
        "20000",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("rows pass"));
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(csv
        .starts_with("table,row,check,artifact,theory,published,accept_lo,accept_hi,pass,note\n"));
    assert_eq!(csv.lines().count(), 6);
    let rows = records(&dir.path().join("table1.ndjson"));
    let theory: Vec<f64> = rows.iter().map(|r| r["theory"].as_f64().unwrap()).collect();
    let want = [2.0, 3.0, 6.0, 105.0 / 9.0, 10395.0 / 225.0];
    for (t, w) in theory.iter().zip(want) {
        assert!((t - w).abs() < 1e-9, "{t} vs {w}");
    }
    assert_eq!(rows[4]["published"], 33.1);

    let out = run(&[
        "reproduce",
        "table2",
        "--out",
        s(dir.path()),
        "--pulses",
        "20000",
    ]);
    assert!(out.status.success());
    let rows = records(&dir.path().join("table2.ndjson"));
    let kt: Vec<f64> = rows
        .iter()
        .filter(|r| r["check"] == "tail-exponent")
        .map(|r| r["artifact"].as_f64().unwrap())
        .collect();
    assert_eq!(kt, vec![0.3125, 0.5, 0.2]);

    let out = run(&[
        "reproduce",
        "fig8",
        "--out",
        s(dir.path()),
        "--pulses",
        "20000",
    ]);
    assert!(out.status.success());
    for name in [
        "th",
        "sb",
        "2w-thermal-pump",
        "2w-bsv-pump",
        "3w-bsv-pump",
        "scg",
    ] {
        let curve = std::fs::read_to_string(dir.path().join(format!("fig8.{name}.csv"))).unwrap();
        assert!(curve.starts_with("n,survival,h_over_n,h_over_n_theory\n"));
        assert!(curve.lines().count() > 20, "{name}");
    }

    let out = run(&["reproduce", "table3", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_json(&out)["message"]
        .as_str()
        .unwrap()
        .contains("table3"));
}
