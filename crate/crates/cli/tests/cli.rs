//! End-to-end runs of the `ssh-emergence` binary: exit codes, the
//! flag/config/default resolution order, and the artifact contract
//! (CSV + manifest + chart, byte-stable across reruns and thread counts).

use std::path::Path;
use std::process::{Command, Output};
use std::{fs, str};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ssh-emergence"));
    // Keep the child hermetic regardless of what the test runner inherited.
    cmd.env_remove("SSH_EMERGENCE_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout(out: &Output) -> &str {
    str::from_utf8(&out.stdout).expect("stdout should be utf-8")
}

fn stderr(out: &Output) -> &str {
    str::from_utf8(&out.stderr).expect("stderr should be utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should not be signalled")
}

fn read_manifest(artifact: &Path) -> Value {
    let mut name = artifact.as_os_str().to_owned();
    name.push(".manifest.json");
    let text = fs::read_to_string(&name).expect("manifest should exist");
    serde_json::from_str(&text).expect("manifest should be valid json")
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[test]
fn summary_reports_gap_and_winding() {
    let out = run(&["ssh"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    // Default hoppings have |t_out| < |t_in|: the trivial dimerization.
    assert!(stdout(&out).contains("winding index   = 0"));

    let out = run(&["ssh", "--t-out", "2.0"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("winding index   = 1"));
}

#[test]
fn closed_gap_fails_only_when_winding_is_insisted_on() {
    let out = run(&["ssh", "--t-in", "1", "--t-out", "1"]);
    assert_eq!(exit_code(&out), 0, "reporting alone should not fail");
    assert!(stdout(&out).contains("undefined"));

    let out = run(&["ssh", "--t-in", "1", "--t-out", "1", "--winding"]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("gap is closed"));
}

#[test]
fn csv_format_prints_the_table_on_stdout() {
    let out = run(&["ssh", "--n-k", "5", "--format", "csv"]);
    assert_eq!(exit_code(&out), 0);
    let lines: Vec<&str> = stdout(&out).lines().collect();
    assert_eq!(lines[0], "k,e_minus,e_plus");
    assert_eq!(lines.len(), 6, "header plus one row per momentum sample");
    for row in &lines[1..] {
        let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        // The two branches are mirror images of each other.
        assert_eq!(cols[1], -cols[2]);
    }
    let last_k: f64 = lines[5].split(',').next().unwrap().parse().unwrap();
    assert!((last_k - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn homotopy_artifacts_are_deterministic_and_digested() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["homotopy", "--n-eps", "9", "--output", "scan.csv"];

    let out = bin().args(args).current_dir(dir.path()).output().unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let csv_path = dir.path().join("scan.csv");
    let bytes = fs::read(&csv_path).unwrap();
    let text = str::from_utf8(&bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,mu1_0,mu2_0,mu1_pi,mu2_pi,gap0,gapPi");
    assert_eq!(lines.len(), 10, "header plus nine sample rows");
    assert!(lines[1].starts_with("-1.00000000000000e0,"));
    assert!(lines[5].starts_with("0.00000000000000e0,"));
    assert!(lines[9].starts_with("1.00000000000000e0,"));

    let manifest = read_manifest(&csv_path);
    assert_eq!(manifest["command"], "homotopy");
    assert_eq!(manifest["output"], "scan.csv");
    assert_eq!(manifest["parameters"]["n_eps"], "9");
    assert_eq!(manifest["parameters"]["lambda2"], "100");
    assert_eq!(manifest["sha256"], sha256_hex(&bytes));
    assert!(manifest["duration_seconds"].as_f64().unwrap() >= 0.0);

    // A rerun on a throttled thread pool must reproduce the bytes exactly.
    let rerun_dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(args)
        .env("SSH_EMERGENCE_THREADS", "2")
        .current_dir(rerun_dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert_eq!(fs::read(rerun_dir.path().join("scan.csv")).unwrap(), bytes);

    // Atomic writes rename their staging files away.
    for entry in fs::read_dir(dir.path()).unwrap() {
        let name = entry.unwrap().file_name();
        assert!(
            !name.to_string_lossy().ends_with(".partial"),
            "staging file left behind: {name:?}"
        );
    }
}

#[test]
fn homotopy_chart_is_written_alongside_the_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["homotopy", "--n-eps", "5", "--svg", "chart.svg"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));

    let svg_path = dir.path().join("chart.svg");
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 4, "one line per band edge");

    let manifest = read_manifest(&svg_path);
    assert_eq!(manifest["sha256"], sha256_hex(svg.as_bytes()));
}

#[test]
fn config_file_fills_in_what_flags_do_not() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# hopping overrides\nt_out = 2.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let out = run(&["ssh", "--config", cfg]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("t_out = 2.5"));
    assert!(stdout(&out).contains("winding index   = 1"));

    // A flag beats the file, and the manifest echoes the winning value.
    let out = bin()
        .args(["ssh", "--config", cfg, "--t-out", "0.5", "--output", "disp.csv"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("winding index   = 0"));
    let manifest = read_manifest(&dir.path().join("disp.csv"));
    assert_eq!(manifest["parameters"]["t_out"], "0.5");
    assert_eq!(manifest["parameters"]["t_in"], "1");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "t_out = 0.5\nwobble = 3\n").unwrap();

    let out = run(&["ssh", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("wobble"));
}

#[test]
fn malformed_config_lines_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "t_out 0.5\n").unwrap();

    let out = run(&["ssh", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("run.conf:1"));
}

#[test]
fn failure_classes_map_to_distinct_exit_codes() {
    // Wells wider than their spacings overlap: bad input.
    let out = run(&["bands", "--w-a", "0.6", "--w-b", "0.6"]);
    assert_eq!(exit_code(&out), 3);
    assert!(stderr(&out).contains("disjoint"));

    // A hopelessly deep lattice overflows the transfer matrices.
    let out = run(&["bands", "--lambda2", "1000000"]);
    assert_eq!(exit_code(&out), 4);

    // A grid beyond the size cap is refused before any allocation.
    let out = run(&["finite-volume", "--cells", "3000", "--grid-per-cell", "2048"]);
    assert_eq!(exit_code(&out), 5);
    assert!(stderr(&out).contains("exceeds"));
}

#[test]
fn usage_errors_use_the_conventional_code() {
    let out = run(&["ssh", "--t-in", "purple"]);
    assert_eq!(exit_code(&out), 2);

    let out = run(&["no-such-command"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn reduce_table_carries_the_tight_binding_limit() {
    let out = run(&["reduce", "--lambda", "20", "--format", "csv"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let lines: Vec<&str> = stdout(&out).lines().collect();
    assert_eq!(
        lines[0],
        "lambda,alpha,rho1,rho2,ratio,onsite,overlap,t_in,t_out,winding"
    );
    let cols: Vec<&str> = lines[1].split(',').collect();
    let ratio: f64 = cols[4].parse().unwrap();
    let winding: i64 = cols[9].parse().unwrap();
    // At lambda = 20 the hopping ratio is already close to its limit.
    assert!((ratio - (-1.0f64 / 15.0).exp()).abs() < 0.05);
    assert_eq!(winding, 0);

    // Negative alpha swaps which spacing is long: the other winding index.
    let out = run(&["reduce", "--lambda", "20", "--alpha", "-0.0666"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("winding = 1"));
}
