use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn randev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randev"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn randev_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_randev"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bits");
    let b = dir.path().join("b.bits");
    for p in [&a, &b] {
        let out = randev(&[
            "generate", "--source", "markov", "--bias", "0.1", "--a1", "0.1", "--nbits", "1000000",
            "--seed", "42", "--out", path_str(p),
        ]);
        assert_eq!(code(&out), 0);
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes.len(), 125_000);
    assert_eq!(bytes, fs::read(&b).unwrap());

    let piped = randev(&[
        "generate", "--source", "markov", "--bias", "0.1", "--a1", "0.1", "--nbits", "1000000",
        "--seed", "42",
    ]);
    assert_eq!(piped.stdout, bytes);
}

#[test]
fn inadmissible_markov_names_the_range() {
    let out = randev(&["generate", "--source", "markov", "--bias", "0.5", "--a1", "-0.9", "--nbits", "10"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[-0.333333, 1]"), "{err}");
}

#[test]
fn missing_source_parameter_is_a_usage_error() {
    let out = randev(&["generate", "--source", "deadtime", "--tau", "1000", "--nbits", "10"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--dead-time"));
    assert_eq!(code(&randev(&["no-such-command"])), 1);
    assert_eq!(code(&randev(&["--help"])), 0);
}

#[test]
fn deadtime_file_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.bits");
    let out = randev(&[
        "generate", "--source", "deadtime", "--tau", "1000", "--dead-time", "40", "--nbits",
        "10000000", "--seed", "7", "--out", path_str(&file),
    ]);
    assert_eq!(code(&out), 0);
    let report = json(&randev(&["analyze", path_str(&file), "--json"]));
    let a1 = report["autocorr"][0]["value"].as_f64().unwrap();
    assert!(close(a1, -0.039, 0.002), "a1 = {a1}");
    let dm = report["deviation_markov"].as_f64().unwrap();
    assert!(close(dm, 1.109e-3, 0.1109e-3), "deviation_markov = {dm}");
}

#[test]
fn report_schema_has_exact_keys() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.bits");
    randev(&["generate", "--source", "markov", "--a1", "0.2", "--nbits", "50000", "--seed", "1", "--out", path_str(&file)]);
    let report = json(&randev(&["analyze", path_str(&file), "--json", "--max-lag", "3"]));
    let mut keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "autocorr", "bias", "cond_entropy", "deviation_markov", "deviation_plugin",
            "deviation_sigma", "mi_lag1", "n_bits", "n_max"
        ]
    );
    let mut bias: Vec<&String> = report["bias"].as_object().unwrap().keys().collect();
    bias.sort_unstable();
    assert_eq!(bias, ["sigma", "value"]);
    let lags = report["autocorr"].as_array().unwrap();
    assert_eq!(lags.len(), 3);
    let mut lag_keys: Vec<&String> = lags[0].as_object().unwrap().keys().collect();
    lag_keys.sort_unstable();
    assert_eq!(lag_keys, ["lag", "sigma", "value"]);
    assert_eq!(report["n_bits"], 50000);
    assert!(report["n_max"].is_number());
}

#[test]
fn alternating_ascii_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("alt.txt");
    fs::write(&file, "01".repeat(5000) + "\n").unwrap();
    let report = json(&randev(&["analyze", path_str(&file), "--format", "ascii", "--json"]));
    assert_eq!(report["n_bits"], 10_000);
    assert_eq!(report["deviation_plugin"].as_f64().unwrap(), 1.0);
    assert!(close(report["n_max"].as_f64().unwrap(), 2.885, 1e-3));
}

#[test]
fn analyze_reads_stdin_and_rejects_degenerate_input() {
    let bytes = randev(&["generate", "--source", "ideal", "--nbits", "80000", "--seed", "3"]).stdout;
    let report = json(&randev_stdin(&["analyze", "-", "--json"], &bytes));
    assert_eq!(report["n_bits"], 80_000);

    let table = randev_stdin(&["analyze", "-"], &bytes);
    assert_eq!(code(&table), 0);
    assert!(stdout(&table).contains("deviation_plugin"));

    let ascii = randev_stdin(&["analyze", "-", "--format", "ascii"], b"0101");
    assert_eq!(code(&ascii), 1);

    let constant = randev_stdin(&["analyze", "-"], &[0u8; 100]);
    assert_eq!(code(&constant), 1);
    assert!(String::from_utf8_lossy(&constant.stderr).contains("constant"));

    let missing = randev(&["analyze", "/definitely/not/here.bits"]);
    assert_eq!(code(&missing), 3);
}

#[test]
fn predictions() {
    let m = json(&randev(&["predict", "--source", "markov", "--bias", "0.1", "--a1", "0.1"]));
    assert!(close(m["deviation_exact"].as_f64().unwrap(), 0.014442, 5e-7));
    assert!(close(m["deviation_approx"].as_f64().unwrap(), 0.014427, 5e-7));

    let d = json(&randev(&["predict", "--source", "deadtime", "--tau", "1000", "--dead-time", "40"]));
    assert!(close(d["a1"].as_f64().unwrap(), -0.039211, 5e-7));
    assert!(close(d["deviation_approx"].as_f64().unwrap(), 1.109e-3, 5e-7));

    let i = json(&randev(&["predict", "--source", "ideal"]));
    assert_eq!(i["deviation_exact"].as_f64(), Some(0.0));
    assert_eq!(i["deviation_approx"].as_f64(), Some(0.0));
}

#[test]
fn nmax_variants() {
    let v = json(&randev(&["nmax", "--deviation", "1e-18", "--json"]));
    assert!(close(v["n_max"].as_f64().unwrap() / 1e18, 2.885, 1e-3));

    let v = json(&randev(&["nmax", "--a1", "0.04", "--bias", "0", "--json"]));
    assert!(close(v["deviation"].as_f64().unwrap(), 1.154e-3, 5e-7));
    assert!(close(v["n_max"].as_f64().unwrap(), 2.50e3, 5.0));

    let v = json(&randev(&["nmax", "--deviation", "0", "--json"]));
    assert_eq!(v["n_max"], "unbounded");
    let text = randev(&["nmax", "--deviation", "0"]);
    assert!(stdout(&text).contains("unbounded"));

    assert_eq!(code(&randev(&["nmax", "--deviation", "-1"])), 1);
    assert_eq!(code(&randev(&["nmax"])), 1);
}

#[test]
fn monitor_exit_codes() {
    let ideal = randev(&["generate", "--source", "ideal", "--nbits", &(10u64 << 20).to_string(), "--seed", "11"]).stdout;
    let out = randev_stdin(&["monitor"], &ideal);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().all(|l| l.ends_with(",ok")));

    let markov = randev(&["generate", "--source", "markov", "--a1", "0.1", "--nbits", &(3u64 << 20).to_string(), "--seed", "5"]).stdout;
    let out = randev_stdin(&["monitor", "-"], &markov);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).lines().all(|l| l.ends_with(",ALARM")));

    let short = randev_stdin(&["monitor"], &markov[..1000]);
    assert_eq!(code(&short), 0);
    let text = stdout(&short);
    assert_eq!(text.lines().count(), 1);
    assert!(text.trim_end().ends_with(",incomplete"));

    assert_eq!(code(&randev(&["monitor", "/definitely/not/here.bits"])), 3);
    assert_eq!(code(&randev_stdin(&["monitor", "--window-bits", "100"], &[])), 1);
}

#[test]
fn validate_approx_reports_small_error() {
    let out = randev(&["validate-approx", "--grid-step", "0.02"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("max_relative_error")).unwrap();
    let pct: f64 = line
        .split_whitespace()
        .nth(1)
        .unwrap()
        .trim_end_matches('%')
        .parse()
        .unwrap();
    assert!(pct <= 0.25, "{line}");
}

#[test]
fn fig2_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("fig2.csv");
    let out = randev(&["fig2", "--min", "-0.99", "--max", "0.99", "--step", "0.01", "--out", path_str(&file)]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&file).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "a1,mi_exact,mi_approx");
    assert_eq!(lines.len() - 1, 199);
    assert!(lines.contains(&"0,0,0"));
}

#[test]
fn concat_of_byte_aligned_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.bits");
    let b = dir.path().join("b.bits");
    let c = dir.path().join("c.bits");
    fs::write(&a, [0x12u8, 0x34, 0x56]).unwrap();
    fs::write(&b, [0xffu8, 0x00]).unwrap();
    let out = randev(&["concat", path_str(&a), path_str(&b), "--out", path_str(&c)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(&c).unwrap(), [0x12, 0x34, 0x56, 0xff, 0x00]);
}

#[test]
fn concat_of_ascii_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let c = dir.path().join("c.txt");
    fs::write(&a, "101\n").unwrap();
    fs::write(&b, "0011").unwrap();
    let out = randev(&["concat", "--format", "ascii", path_str(&a), path_str(&b), "--out", path_str(&c)]);
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read_to_string(&c).unwrap().trim_end(), "1010011");
}

#[test]
fn prng_demo_runs() {
    let out = randev(&["prng-demo", "--seed", "1", "--length", "65536"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("reproducible from seed: true"));
    assert_eq!(stdout(&randev(&["prng-demo", "--seed", "1", "--length", "65536"])), text);
}
