use std::path::Path;
use std::process::{Command, Output};

use seqforge::error::exit;
use seqforge_core::io;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_seqforge");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: [&str; 8] = ["--L", "8", "--N", "16", "--n-samples", "64", "--max-iterations", "150"];

fn generate(dir: &TempDir, name: &str, extra: &[&str]) -> (std::path::PathBuf, Output) {
    let out = dir.path().join(name);
    let mut args = vec!["generate", "--quiet", "-o", p(&out)];
    args.extend_from_slice(&SMALL);
    args.extend_from_slice(extra);
    let o = run(&args);
    (out, o)
}

#[test]
fn welch_bound_prints_value() {
    let o = run(&["welch-bound", "--L", "36", "--N", "100"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!((v - (64.0f64 / 3564.0).sqrt()).abs() < 1e-15);

    let o = run(&["welch-bound", "--L", "8", "--N", "8"]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
}

#[test]
fn generate_writes_set_and_report() {
    let dir = TempDir::new().unwrap();
    let (out, o) = generate(&dir, "a.txt", &["--papr-threshold", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = io::read(&out).unwrap();
    assert_eq!((set.len(), set.count()), (8, 16));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.txt.report.json")).unwrap()).unwrap();
    assert_eq!(report["papr_stage"], "active");
    assert_eq!(report["config"]["papr_threshold"], "2");
    assert!(report["run"]["final_metrics"]["max_papr"].as_f64().unwrap() <= 2.0 + 1e-9);
    assert_eq!(report["run"]["trajectory"].as_array().unwrap().len() as u64, report["run"]["iterations"].as_u64().unwrap());
}

#[test]
fn json_output_and_custom_report_path() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let (out, o) = generate(&dir, "a.json", &["--report", p(&report)]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&out).unwrap().trim_start().starts_with('{'));
    assert!(report.exists());
    assert!(io::read(&out).is_ok());
}

#[test]
fn vacuous_threshold_skips_papr_stage() {
    let dir = TempDir::new().unwrap();
    for t in ["inf", "8", "20"] {
        let name = format!("v{t}.txt");
        let (_, o) = generate(&dir, &name, &["--papr-threshold", t]);
        assert!(o.status.success());
        let body = std::fs::read_to_string(dir.path().join(format!("{name}.report.json"))).unwrap();
        let report: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert!(report["papr_stage"].as_str().unwrap().starts_with("skipped"), "{t}");
        assert_eq!(report["run"]["papr_stage_skipped"], true);
    }
}

#[test]
fn regeneration_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, _) = generate(&dir, "a.txt", &["--papr-threshold", "2", "--seed", "5"]);
    let (b, _) = generate(&dir, "b.txt", &["--papr-threshold", "2", "--seed", "5"]);
    let (c, _) = generate(&dir, "c.txt", &["--papr-threshold", "2", "--seed", "6"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# test\nL = 8\nN = 12\nN_S = 32\nmax_iterations = 40\nseed = 9\n").unwrap();
    let out = dir.path().join("x.txt");
    let o = run(&["generate", "--quiet", "--config", p(&cfg), "--N", "10", "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = io::read(&out).unwrap();
    assert_eq!(set.count(), 10);
    assert_eq!(set.assignment().n_samples(), 32);
}

#[test]
fn validation_errors_exit_2_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let (_, o) = generate(&dir, "x.txt", &["--papr-threshold", "0.5"]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&o).contains("papr_threshold"));

    let (_, o) = generate(&dir, "x.txt", &["--n-subcarriers", "4"]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));

    let (_, o) = generate(&dir, "x.txt", &["--adaptation-rate", "1.5"]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&o).contains("adaptation_rate"));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "L=8\nN=9\nbogus=1\n").unwrap();
    let o = run(&["generate", "--config", p(&cfg), "-o", p(&dir.path().join("y.txt"))]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn missing_input_is_io_error() {
    let o = run(&["evaluate", "/nonexistent/seqs.txt"]);
    assert_eq!(o.status.code(), Some(exit::IO));
}

#[test]
fn malformed_input_reports_line() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("bad.txt");
    std::fs::write(&f, "version=1\nL=2\nN=2\nN_C=2\nN_S=2\nc=1,2\n1,0,0,0\n0,0\n").unwrap();
    let o = run(&["evaluate", p(&f)]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
    assert!(stderr(&o).contains("line 8"), "{}", stderr(&o));
}

#[test]
fn infeasible_threshold_exits_4_and_still_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.txt");
    let o = run(&[
        "generate", "--quiet", "--L", "4", "--N", "6", "--n-samples", "16", "--papr-threshold", "1.000001",
        "--papr-inner-cap", "5", "--max-iterations", "3", "-o", p(&out),
    ]);
    assert_eq!(o.status.code(), Some(exit::NO_FEASIBLE_SOLUTION));
    assert!(!out.exists());
    let body = std::fs::read_to_string(dir.path().join("x.txt.report.json")).unwrap();
    assert!(body.contains("no_feasible_solution"));
}

#[test]
fn evaluate_closes_the_loop() {
    let dir = TempDir::new().unwrap();
    let (out, _) = generate(&dir, "a.txt", &["--papr-threshold", "2"]);
    let json = dir.path().join("m.json");
    let o = run(&["evaluate", p(&out), "--papr-threshold", "2", "--json", p(&json)]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.txt.report.json")).unwrap()).unwrap();
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(m["metrics"]["coherence"], report["run"]["final_metrics"]["coherence"]);
    assert_eq!(m["metrics"]["max_papr"], report["run"]["final_metrics"]["max_papr"]);

    let o = run(&["evaluate", p(&out), "--papr-threshold", "1.2"]);
    assert_eq!(o.status.code(), Some(exit::THRESHOLD_EXCEEDED));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn finer_evaluation_grid_never_lowers_papr() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.txt");
    run(&["baseline", "gaussian", "--L", "8", "--N", "20", "--n-subcarriers", "16", "--n-samples", "32", "-o", p(&out)]);
    let mut prev = 0.0;
    for ns in ["32", "64", "128", "256"] {
        let json = dir.path().join(format!("m{ns}.json"));
        let o = run(&["evaluate", p(&out), "--n-samples", ns, "--json", p(&json)]);
        assert!(o.status.success(), "{}", stderr(&o));
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
        let max = m["metrics"]["max_papr"].as_f64().unwrap();
        assert!(max >= prev, "N_S={ns}");
        prev = max;
    }
}

#[test]
fn zc_baseline_padding_and_roots() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("zc.txt");
    let o = run(&["baseline", "zc", "--length", "7", "--pad-to", "10", "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = io::read(&out).unwrap();
    assert_eq!((set.len(), set.count()), (10, 6));
    assert!(set.iter().all(|s| s[7..].iter().all(|z| z.norm() == 0.0)));

    let o = run(&["baseline", "zc", "--length", "7", "--roots", "7", "-o", p(&out)]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));

    let o = run(&["baseline", "zc", "--pad-to", "12", "--select", "4", "-o", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = io::read(&out).unwrap();
    assert_eq!((set.len(), set.count()), (12, 4));
}

#[test]
fn gaussian_baseline_is_seeded() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    for f in [&a, &b] {
        let o = run(&["baseline", "gaussian", "--L", "8", "--N", "20", "--seed", "3", "-o", p(f)]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_csv_layout() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("s.csv");
    let o = run(&[
        "sweep", "--quiet", "--no-timing", "--L", "8", "--N", "12", "--n-samples", "32", "--max-iterations", "30",
        "--axis", "sequence_count", "--values", "12,16", "--seeds", "2", "-o", p(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], seqforge::sweep::CSV_TAG);
    assert_eq!(lines[1], seqforge::sweep::CSV_COLUMNS);
    let kinds: Vec<&str> = lines[2..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(kinds, ["run", "run", "best", "run", "run", "best"]);
    assert!(lines[5].starts_with("run,sequence_count,16,1,"));

    let o = run(&["sweep", "--L", "8", "--N", "12", "--axis", "papr_threshold", "--values", ""]);
    assert_eq!(o.status.code(), Some(exit::VALIDATION));
}

#[test]
fn sweep_to_stdout() {
    let o = run(&[
        "sweep", "--quiet", "--L", "6", "--N", "8", "--n-samples", "16", "--max-iterations", "10", "--axis",
        "papr_threshold", "--values", "inf",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with(seqforge::sweep::CSV_TAG));
}

#[test]
fn sweep_rows_respect_welch_and_threshold() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("s.csv");
    let o = run(&[
        "sweep", "--quiet", "--L", "8", "--N", "16", "--n-samples", "64", "--max-iterations", "200",
        "--axis", "papr_threshold", "--values", "1.5,3,inf", "--seeds", "2", "-o", p(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let body = std::fs::read_to_string(&csv).unwrap();
    let header: Vec<&str> = body.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    for line in body.lines().skip(2) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[col("outcome")], "feasible");
        let mu: f64 = f[col("mu_min")].parse().unwrap();
        let papr: f64 = f[col("max_papr")].parse().unwrap();
        let welch: f64 = f[col("welch_bound")].parse().unwrap();
        let threshold: f64 = f[col("papr_threshold")].parse().unwrap();
        assert!(mu >= welch - 1e-12, "{line}");
        assert!(papr <= threshold + 1e-9, "{line}");
        assert!(!f[col("wall_time_s")].is_empty());
    }
}

#[test]
fn report_trajectory_ends_at_final_coherence() {
    let dir = TempDir::new().unwrap();
    let (_, o) = generate(&dir, "t.txt", &["--papr-threshold", "3"]);
    assert!(o.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.txt.report.json")).unwrap()).unwrap();
    let trajectory = report["run"]["trajectory"].as_array().unwrap();
    let mins: Vec<f64> = trajectory.iter().map(|t| t["mu_min"].as_f64().unwrap()).collect();
    assert!(mins.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*mins.last().unwrap(), report["run"]["final_metrics"]["coherence"].as_f64().unwrap());
    assert_eq!(report["config"]["seed"], "1");
}

#[test]
fn stride_pattern_spreads_subcarriers() {
    let dir = TempDir::new().unwrap();
    let (out, o) = generate(&dir, "s.txt", &["--subcarriers", "stride=2", "--n-subcarriers", "32", "--papr-threshold", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let set = io::read(&out).unwrap();
    assert_eq!(set.assignment().indices(), &[2, 4, 6, 8, 10, 12, 14, 16]);
    assert_eq!(set.assignment().n_subcarriers(), 32);
}
