//! End-to-end tests of the `zapledger` binary: artifact shapes, published
//! cost figures in the outputs, determinism, and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_zapledger")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .unwrap()
        .to_path_buf()
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zapledger-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let output = Command::new(bin())
        .args(args)
        .env_remove("ZAPLEDGER_OUT")
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "expected success for {args:?}: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(bin())
        .args(args)
        .env_remove("ZAPLEDGER_OUT")
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

#[test]
fn bench_emits_curves_reductions_and_receipts() {
    let out = temp_dir("bench");
    run_ok(&["bench", "--n-max", "10", "--out", out.to_str().unwrap()]);

    let curves = read(&out, "curves.csv");
    // Ten-token featherweight transfer lands within 5% of the published
    // batch figure.
    let row = curves
        .lines()
        .find(|l| l.starts_with("featherweight,transfer,10,"))
        .expect("fw transfer n=10 row");
    let gas: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert!((gas - 469_711.0).abs() / 469_711.0 <= 0.05, "{row}");
    // Single-token rows equal the single-op receipts.
    assert!(curves.contains("featherweight,transfer,1,71456,"));
    assert!(curves.contains("featherweight,mint,1,158483,"));
    assert!(curves.contains("lightweight,mint,1,165052,"));
    assert!(curves.contains("lightweight,transfer,1,169077,"));

    // The baseline normalized against itself is the constant series 1.0.
    let reductions = read(&out, "reductions.csv");
    for line in reductions.lines().filter(|l| l.contains(",heavyweight,")) {
        assert!(line.ends_with(",1.000000,0.000000"), "{line}");
    }

    let receipts = read(&out, "receipts.jsonl");
    assert_eq!(receipts.lines().count(), 3 + 4 + 3); // hw 3 ops, fw 4, lw 3
    assert!(receipts.contains("\"op_name\":\"modify\""));
}

#[test]
fn simulate_summary_reproduces_viability_total() {
    let out = temp_dir("sim-viability");
    let scenario = repo_root().join("scenarios/two_house_viability.json");
    let output = run_ok(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--strategy",
        "lightweight",
        "--profile",
        "ethereum",
        "--rate",
        "standard",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("36115.20 USD"), "{stdout}");
    assert!(stdout.contains("17280 mints"), "{stdout}");

    // Identical command, identical bytes.
    let out2 = temp_dir("sim-viability-2");
    run_ok(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--strategy",
        "lightweight",
        "--profile",
        "ethereum",
        "--rate",
        "standard",
        "--out",
        out2.to_str().unwrap(),
    ]);
    for name in [
        "events.jsonl",
        "statements.csv",
        "receipts.jsonl",
        "feasibility.csv",
        "summary.txt",
    ] {
        assert_eq!(read(&out, name), read(&out2, name), "{name} differs");
    }
}

#[test]
fn simulate_on_gasfree_profile_reports_hosting() {
    let out = temp_dir("sim-quorum");
    let scenario = repo_root().join("scenarios/three_house_mixed.json");
    let output = run_ok(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--profile",
        "quorum",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(
        stdout.contains("simulated gas spend (standard): 0.00 USD"),
        "{stdout}"
    );
    assert!(stdout.contains("hosting: 80.00 USD/node-month"), "{stdout}");

    // The statements match the hand-worked settlement.
    let statements = read(&out, "statements.csv");
    assert!(
        statements.contains("0x1100000000000000000000000000000000000000,0,4.000,0.000,120,0,0,0")
    );
    assert!(
        statements.contains("0x2200000000000000000000000000000000000000,0,2.000,3.000,0,60,0,0")
    );
    assert!(
        statements.contains("0x3300000000000000000000000000000000000000,0,0.000,2.000,0,60,30,1")
    );
}

#[test]
fn report_prices_bench_receipts_to_published_cells() {
    let bench_out = temp_dir("report-src");
    run_ok(&[
        "bench",
        "--n-max",
        "1",
        "--out",
        bench_out.to_str().unwrap(),
    ]);
    let receipts = bench_out.join("receipts.jsonl");

    let report_out = temp_dir("report-out");
    let output = run_ok(&[
        "report",
        receipts.to_str().unwrap(),
        "--out",
        report_out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("3702977"), "{stdout}");
    assert!(stdout.contains("26.66"), "{stdout}");
    assert!(stdout.contains("23.11"), "{stdout}");

    let csv = read(&report_out, "cost_table.csv");
    assert!(csv.contains("featherweight,deploy,1,1,3702977,111089310,26.66,96277402,23.11"));
    assert!(csv.contains("lightweight,transfer,1,1,169077,5072310,1.22,4396002,1.06"));
}

#[test]
fn report_on_empty_receipts_succeeds_with_empty_table() {
    let dir = temp_dir("report-empty");
    std::fs::create_dir_all(&dir).unwrap();
    let receipts = dir.join("receipts.jsonl");
    std::fs::write(&receipts, "").unwrap();
    let output = run_ok(&[
        "report",
        receipts.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(String::from_utf8(output.stdout)
        .unwrap()
        .contains("no receipts"));
    let csv = read(&dir, "cost_table.csv");
    assert_eq!(csv.lines().count(), 1, "header only");
}

#[test]
fn invalid_inputs_exit_with_validation_code() {
    assert_eq!(
        exit_code(&["simulate", "--scenario", "/does/not/exist.json"]),
        2
    );
    let scenario = repo_root().join("scenarios/three_house_mixed.json");
    assert_eq!(
        exit_code(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--strategy",
            "colossal",
        ]),
        2
    );
    assert_eq!(exit_code(&["bench", "--n-max", "0"]), 2);

    let dir = temp_dir("bad-receipts");
    std::fs::create_dir_all(&dir).unwrap();
    let receipts = dir.join("receipts.jsonl");
    std::fs::write(&receipts, "not json\n").unwrap();
    assert_eq!(exit_code(&["report", receipts.to_str().unwrap()]), 2);
}

#[test]
fn out_env_variable_overrides_flag() {
    let flag_dir = temp_dir("env-flag");
    let env_dir = temp_dir("env-real");
    let output = Command::new(bin())
        .args([
            "bench",
            "--strategy",
            "featherweight",
            "--n-max",
            "2",
            "--out",
            flag_dir.to_str().unwrap(),
        ])
        .env("ZAPLEDGER_OUT", env_dir.to_str().unwrap())
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    assert!(env_dir.join("curves.csv").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn checked_in_profiles_match_builtin_defaults() {
    use zapledger::profile::ChainProfile;
    for profile in [ChainProfile::ethereum(), ChainProfile::quorum()] {
        let path = repo_root().join(format!("profiles/{}.json", profile.name));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
        assert_eq!(text, profile.to_json_string(), "{} drifted", path.display());
        let parsed = ChainProfile::from_json_str(&text).unwrap();
        assert_eq!(parsed, profile);
    }
}

#[test]
fn simulate_accepts_profile_files() {
    let out = temp_dir("profile-file");
    let scenario = repo_root().join("scenarios/three_house_mixed.json");
    let profile = repo_root().join("profiles/quorum.json");
    let output = run_ok(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--profile",
        profile.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("profile: quorum"), "{stdout}");
    assert!(stdout.contains("hosting: 80.00 USD/node-month"), "{stdout}");
}
