//! End-to-end tests of the `cjl` binary: format handling, exit codes,
//! report reproducibility, and the documented example invocations.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cjl"));
    // Isolate from the ambient environment so seed resolution is what the
    // arguments say it is.
    cmd.env_remove("CJL_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|line| serde_json::from_str(line).expect("each stdout line is one JSON record"))
        .collect()
}

/// Records with the timing field removed: everything that the determinism
/// contract promises will match across reruns.
fn numeric_content(out: &Output) -> Vec<Value> {
    let mut records = stdout_lines(out);
    for record in &mut records {
        record
            .as_object_mut()
            .expect("records are objects")
            .remove("wall_time_seconds");
    }
    records
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_csv(path: &Path, rows: &[Vec<f64>]) {
    let mut text = String::new();
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}

fn write_binary(path: &Path, d: u32, rows: &[Vec<f64>]) {
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"CJL1");
    bytes.extend_from_slice(&d.to_le_bytes());
    bytes.extend_from_slice(&(rows.len() as u32).to_le_bytes());
    for row in rows {
        for v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn embed_maps_identical_points_identically() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    write_csv(
        &input,
        &[vec![0.5, -1.0, 2.0, 0.25], vec![0.5, -1.0, 2.0, 0.25]],
    );
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--seed",
        "11",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let text = std::fs::read_to_string(&output).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn embed_binary_output_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|i| {
            (0..16)
                .map(|j| ((i * 31 + j * 7) % 13) as f64 - 6.0)
                .collect()
        })
        .collect();
    write_binary(&input, 16, &rows);

    let out_a = dir.path().join("a.bin");
    let out_b = dir.path().join("b.bin");
    for out_path in [&out_a, &out_b] {
        let out = run(&[
            "embed",
            "--input",
            input.to_str().unwrap(),
            "--output",
            out_path.to_str().unwrap(),
            "--k",
            "8",
            "--seed",
            "3",
        ]);
        assert!(out.status.success(), "{}", stderr_text(&out));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b);
    assert_eq!(&a[..4], b"CJL1");
    assert_eq!(u32::from_le_bytes(a[4..8].try_into().unwrap()), 8);
    assert_eq!(u32::from_le_bytes(a[8..12].try_into().unwrap()), 5);
}

#[test]
fn embed_clamps_computed_dimension_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|i| {
            (0..512)
                .map(|j| ((i * 37 + j * 11) % 101) as f64 / 50.0 - 1.0)
                .collect()
        })
        .collect();
    write_csv(&input, &rows);
    let output = dir.path().join("out.csv");
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    assert!(
        stderr_text(&out).contains("clamping"),
        "{}",
        stderr_text(&out)
    );
    let record = &stdout_lines(&out)[0];
    assert_eq!(record["result"]["k"], 512);
    assert_eq!(record["result"]["k_unclamped"], 12142);
    assert_eq!(record["result"]["clamped"], true);
}

#[test]
fn embed_rejects_explicit_k_above_d() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    write_csv(&input, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.csv").to_str().unwrap(),
        "--k",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_text(&out));
    assert!(
        stderr_text(&out).contains("exceeds"),
        "{}",
        stderr_text(&out)
    );
}

#[test]
fn malformed_csv_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    std::fs::write(&input, "1.0,2.0\n3.0,oops\n").unwrap();
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_text(&out));
    let err = stderr_text(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("field 2"), "{err}");
}

#[test]
fn corrupt_binary_exits_2_with_offset() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.bin");
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"CJL1");
    bytes.extend_from_slice(&4u32.to_le_bytes());
    bytes.extend_from_slice(&2u32.to_le_bytes());
    bytes.extend_from_slice(&[0u8; 3]); // far short of 2 * 4 floats
    std::fs::write(&input, bytes).unwrap();
    let out = run(&[
        "embed",
        "--input",
        input.to_str().unwrap(),
        "--output",
        dir.path().join("out.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_text(&out));
    assert!(
        stderr_text(&out).contains("header implies"),
        "{}",
        stderr_text(&out)
    );
}

#[test]
fn tail_regime_violation_exits_3() {
    let out = run(&[
        "tail",
        "--dist",
        "rademacher",
        "--d",
        "64",
        "--k",
        "16",
        "--n",
        "2",
        "--tau",
        "0.3",
        "--theta",
        "0.8",
        "--epsilon",
        "0.45",
        "--trials",
        "1000",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_text(&out));
    assert!(
        stderr_text(&out).contains("regime violation"),
        "{}",
        stderr_text(&out)
    );
}

#[test]
fn mgf_rejects_contradictory_eta() {
    let out = run(&[
        "mgf",
        "--dist",
        "rademacher",
        "--lambda",
        "0.3",
        "--eta",
        "0.25",
        "--trials",
        "10000",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr_text(&out));
    assert!(
        stderr_text(&out).contains("fixed by --dist"),
        "{}",
        stderr_text(&out)
    );
}

#[test]
fn spectral_grid_is_dominated_per_record() {
    let out = run(&[
        "spectral", "--d", "256", "--k", "64", "--t-grid", "1,2,3,4", "--trials", "2000", "--seed",
        "31",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let records = stdout_lines(&out);
    assert_eq!(records.len(), 4);
    for (record, t) in records.iter().zip([1.0, 2.0, 3.0, 4.0]) {
        assert_eq!(record["result"]["threshold"], t);
        assert_eq!(record["result"]["dominated"], true, "{record}");
    }
}

#[test]
fn mgf_rademacher_sample_mean_is_dominated() {
    let out = run(&[
        "mgf",
        "--dist",
        "rademacher",
        "--lambda",
        "0.3",
        "--trials",
        "10000",
        "--seed",
        "17",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let records = stdout_lines(&out);
    assert_eq!(records.len(), 1);
    let result = &records[0]["result"];
    let mean = result["sample_mean"].as_f64().unwrap();
    let se = result["sample_std_error"].as_f64().unwrap();
    let bound = result["analytic_bound"].as_f64().unwrap();
    assert!((bound - 1.5811388300841895).abs() < 1e-12);
    assert!(mean <= bound + 3.0 * se, "mean {mean} vs bound {bound}");
    assert_eq!(result["dominated"], true);
}

#[test]
fn distort_meets_the_success_fraction() {
    let out = run(&[
        "distort",
        "--d",
        "256",
        "--n",
        "6",
        "--k",
        "256",
        "--epsilon",
        "0.45",
        "--repeats",
        "10",
        "--seed",
        "23",
        "--summary",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let records = stdout_lines(&out);
    assert_eq!(records.len(), 11); // 10 repeats + summary
    let summary = records.last().unwrap();
    assert_eq!(summary["summary"], true);
    assert_eq!(summary["result"]["passed"], true, "{summary}");
}

#[test]
fn seed_env_var_matches_the_flag() {
    let args = [
        "mgf",
        "--dist",
        "rademacher",
        "--lambda",
        "0.2",
        "--trials",
        "10000",
    ];
    let by_flag = {
        let mut cmd = bin();
        cmd.args(args).args(["--seed", "9"]);
        cmd.output().unwrap()
    };
    let by_env = {
        let mut cmd = bin();
        cmd.args(args).env("CJL_SEED", "9");
        cmd.output().unwrap()
    };
    assert!(by_flag.status.success());
    assert!(by_env.status.success());
    assert_eq!(numeric_content(&by_flag), numeric_content(&by_env));

    let bad_env = {
        let mut cmd = bin();
        cmd.args(args).env("CJL_SEED", "not-a-number");
        cmd.output().unwrap()
    };
    assert_eq!(bad_env.status.code(), Some(1), "{}", stderr_text(&bad_env));
}

#[test]
fn reruns_reproduce_all_numeric_fields() {
    let args = [
        "tail",
        "--d",
        "64",
        "--k",
        "16",
        "--n",
        "100",
        "--trials",
        "1000",
        "--seed",
        "41",
        "--summary",
    ];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success(), "{}", stderr_text(&first));
    assert_eq!(numeric_content(&first), numeric_content(&second));
}

#[test]
fn thread_count_does_not_change_numbers() {
    let base = [
        "spectral", "--d", "64", "--k", "16", "--trials", "2000", "--seed", "29",
    ];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let three = run(&[&base[..], &["--threads", "3"]].concat());
    assert!(one.status.success(), "{}", stderr_text(&one));
    assert!(three.status.success(), "{}", stderr_text(&three));
    assert_eq!(numeric_content(&one), numeric_content(&three));
}

#[test]
fn bench_runs_small_dimensions_without_speed_assertions() {
    let out = run(&[
        "bench", "--d-grid", "8", "--k", "4", "--trials", "3", "--seed", "2",
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));
    let records = stdout_lines(&out);
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["result"]["speed_asserted"], false);
    let rel = records[0]["result"]["max_rel_diff"].as_f64().unwrap();
    assert!(rel < 1e-9, "paths disagree: {rel}");
}

#[test]
fn help_and_bad_flags_use_the_documented_exit_codes() {
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("Exit codes"));

    let bad = run(&["embed", "--no-such-flag"]);
    assert_eq!(bad.status.code(), Some(1));

    let missing = run(&["embed"]);
    assert_eq!(missing.status.code(), Some(1));
}
