use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sqpe"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn case1() -> String {
    configs().join("case1.toml").display().to_string()
}

#[test]
fn spectrum_lists_every_eigenvalue() {
    let out = stdout(&run(&["spectrum", "-c", &case1()]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,eigenvalue,overlap,cdf");
    assert_eq!(lines.len(), 9);
    let first: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
    assert!((first[1] + 0.310_977_222_864_644_6).abs() < 1e-12);
    assert!((first[2] - 0.25).abs() < 1e-12);
    assert!(lines[8].ends_with(",1"));
}

#[test]
fn gse_outputs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = run(&[
            "--threads",
            threads,
            "gse",
            "-c",
            &case1(),
            "--n-samples",
            "3000",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        stdout(&o);
        let report = std::fs::read(out.join("report.json")).unwrap();
        let trace = std::fs::read(out.join("search_trace.csv")).unwrap();
        reports.push((report, trace));
    }
    assert_eq!(reports[0], reports[1]);
    let json: serde_json::Value = serde_json::from_slice(&reports[0].0).unwrap();
    for key in [
        "gse_estimate",
        "beta0_reference",
        "delta0",
        "n_iters",
        "n_samples",
        "a_value",
        "n_g",
        "seed",
        "config_echo",
    ] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    assert_eq!(json["n_samples"], 3000);
}

#[test]
fn flags_override_config() {
    let o = run(&[
        "gse",
        "-c",
        &case1(),
        "--seed",
        "9",
        "--exact",
        "--n-samples",
        "500",
    ]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["seed"], 9);
    assert_eq!(json["config_echo"]["shot_mode"], "exact");
}

#[test]
fn acdf_sweep_reuses_saved_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.csv");
    let o = run(&[
        "acdf",
        "-c",
        &case1(),
        "--n-samples",
        "2000",
        "--points",
        "5",
        "--samples",
        samples.to_str().unwrap(),
    ]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,estimate,std_error,exact_cdf,closed_form_acdf"
    );
    assert_eq!(lines.count(), 5);
    let saved = std::fs::read_to_string(&samples).unwrap();
    assert!(saved.starts_with("# a_value="));
    assert_eq!(saved.lines().filter(|l| !l.starts_with('#')).count(), 2001);
}

#[test]
fn tradeoff_writes_curve() {
    let o = run(&["tradeoff", "-c", &case1(), "--budgets", "50,100,400"]);
    let out = stdout(&o);
    assert!(out.starts_with("b_g,n_g,n_s_scaled,c\n"));
    assert_eq!(out.lines().count(), 4);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn bad_inputs_report_their_source() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.ham", "0.2 IZ\n0.5 IXQ\n");
    let o = run(&["spectrum", "--hamiltonian", &bad]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.ham:2:") && err.contains('Q'), "{err}");

    let ham = configs().join("case1.ham").display().to_string();
    let o = run(&[
        "gse",
        "--hamiltonian",
        &ham,
        "--eta",
        "0.1",
        "--epsilon",
        "0.2",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));

    let cfg = write(dir.path(), "c.toml", "hamiltonian = \"x.ham\"\nbogus = 1\n");
    let o = run(&["gse", "-c", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let o = run(&["gse"]);
    assert!(!o.status.success());
}
