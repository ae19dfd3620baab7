use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tds-mid"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
}

#[test]
fn design_example() {
    let o = run(&["design", "--tau1", "1", "--tau2", "2", "--s0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let get = |k| value(&s, k).unwrap().parse::<f64>().unwrap();
    assert!((get("a0") + 1.5).abs() < 1e-12);
    assert!((get("a1") - 2.0).abs() < 1e-12);
    assert!((get("a2") + 0.5).abs() < 1e-12);
}

#[test]
fn design_to_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.txt");
    let o = run(&[
        "design",
        "--tau1",
        "0.7",
        "--tau2",
        "1.9",
        "--s0",
        "-0.4",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&p).unwrap();
    let lambda: f64 = value(&text, "lambda").unwrap().parse().unwrap();
    assert!((lambda - 0.7 / 1.9).abs() < 1e-15);
}

#[test]
fn count_rhp_at_one_half() {
    let o = run(&["count-rhp", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(value(&s, "Z"), Some("0"));
    assert_eq!(value(&s, "r"), Some("1"));
    assert_eq!(value(&s, "axis_clear"), Some("true"));
}

#[test]
fn count_rhp_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("q.txt");
    // s - 1 + 0.5 e^{-s}: one real root in the right half-plane
    std::fs::write(&p, "0; -1 1\n1; 0.5\n").unwrap();
    let o = run(&["count-rhp", "--qp-file", p.to_str().unwrap()]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(value(&stdout(&o), "Z"), Some("1"));
}

#[test]
fn spectrum_contains_the_triple_origin() {
    let o = run(&["spectrum", "--lambda", "0.5", "--rect=-10,5,-33,33"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("re,im,multiplicity,residual"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let total: f64 = rows.iter().map(|r| r[2]).sum();
    assert_eq!(total, 11.0);
    assert!(rows
        .iter()
        .any(|r| r[2] == 3.0 && r[0].abs() < 1e-6 && r[1].abs() < 1e-6));
    assert!(rows.iter().filter(|r| r[2] == 1.0).all(|r| r[0] < 0.0));
}

#[test]
fn sweep_data_and_stability() {
    let dir = tempfile::tempdir().unwrap();
    let csv = |n: &str| dir.path().join(n);
    let args = |c: &Path, s: &Path| {
        run(&[
            "sweep",
            "--grid",
            "21",
            "--rect=-10,5,-33,33",
            "--out",
            c.to_str().unwrap(),
            "--svg",
            s.to_str().unwrap(),
        ])
    };
    assert_eq!(args(&csv("a.csv"), &csv("a.svg")).status.code(), Some(0));
    assert_eq!(args(&csv("b.csv"), &csv("b.svg")).status.code(), Some(0));
    let a = std::fs::read(csv("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(csv("b.csv")).unwrap());
    assert_eq!(
        std::fs::read(csv("a.svg")).unwrap(),
        std::fs::read(csv("b.svg")).unwrap()
    );
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("lambda,re,im,multiplicity,residual\n"));
    for row in text.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        if f[3] == 1.0 && f[0] < 1.0 {
            assert!(f[1] < 0.0, "{row}");
        }
    }
}

#[test]
fn clearance_report() {
    let o = run(&["clearance", "--lambda", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "verdict"), Some("clear"));
    let o = run(&["clearance", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "verdict"), Some("not_clear"));
}

#[test]
fn simulate_with_rate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let o = run(&[
        "simulate",
        "--tau1",
        "1",
        "--tau2",
        "2",
        "--s0",
        "-0.5",
        "--t-end",
        "80",
        "--dt",
        "0.01",
        "--out",
        p.to_str().unwrap(),
        "--rate",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rate: f64 = value(&stdout(&o), "rate").unwrap().parse().unwrap();
    assert!((rate + 0.5).abs() < 0.025);
    let trace = std::fs::read_to_string(&p).unwrap();
    assert!(trace.starts_with("t,y\n"));
}

#[test]
fn verify_passes_in_the_dominant_regime() {
    for (t1, t2) in [("0.3", "1"), ("1", "2"), ("3", "5")] {
        for s0 in ["-1", "0", "1"] {
            let o = run(&["verify", "--tau1", t1, "--tau2", t2, "--s0", s0]);
            assert_eq!(o.status.code(), Some(0), "{t1} {t2} {s0}: {}", stdout(&o));
            assert_eq!(value(&stdout(&o), "verdict"), Some("pass"));
        }
    }
}

#[test]
fn verify_fails_on_the_neutral_limit() {
    // τ1 → τ2 puts roots on the imaginary axis
    let o = run(&["verify", "--tau1", "0.9999999", "--tau2", "1", "--s0", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn argument_errors_exit_two() {
    for args in [
        &["design", "--tau1", "2", "--tau2", "1", "--s0", "0"][..],
        &["spectrum", "--lambda", "1.5"],
        &["spectrum", "--lambda", "0.5", "--rect", "1,0,0,1"],
        &["spectrum"],
        &["frobnicate"],
        &["sweep", "--grid", "0", "--out", "/dev/null"],
        &[
            "simulate",
            "--tau1",
            "1",
            "--tau2",
            "2",
            "--s0",
            "0",
            "--t-end",
            "-1",
            "--out",
            "/dev/null",
        ],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.csv");
    let o = run(&[
        "simulate",
        "--tau1",
        "1",
        "--tau2",
        "2",
        "--s0",
        "40",
        "--t-end",
        "100",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1e300"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("run.cfg");
    std::fs::write(&p, "# design\ntau1=1\ntau2=2\ns0=5\n").unwrap();
    let o = run(&["design", "--config", p.to_str().unwrap(), "--s0", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(value(&s, "a0").unwrap().starts_with("-1.5"));
    std::fs::write(&p, "colour=blue\n").unwrap();
    let o = run(&[
        "--config",
        p.to_str().unwrap(),
        "clearance",
        "--lambda",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn worker_count_from_environment() {
    let run_env = |w: &str| {
        Command::new(env!("CARGO_BIN_EXE_tds-mid"))
            .args(["spectrum", "--lambda", "0.3"])
            .env("TDS_MID_WORKERS", w)
            .output()
            .unwrap()
    };
    let one = run_env("1");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, run_env("4").stdout);
    assert_eq!(run_env("many").status.code(), Some(2));
}
