//! CLI surface behavior: exit codes, help, and equivalence with direct
//! library calls.

use std::process::Command;

use spannogram::experiments::{recovery_experiment, RecoveryConfig};

fn spca() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spca"))
}

#[test]
fn help_exits_zero_and_documents_flags() {
    let out = spca().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for sub in ["solve", "multi", "bound", "oracle", "spiked", "spectrum", "eliminate"] {
        assert!(text.contains(sub), "--help missing subcommand {sub}");
    }
    let out = spca().args(["solve", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    for flag in ["--input", "--format", "--k", "--d", "--p", "--seed", "--output", "--tol"] {
        assert!(text.contains(flag), "solve --help missing {flag}");
    }
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = spca().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.csv");
    std::fs::write(&path, "1.0,0.0\n0.0,2.0\n").unwrap();
    // k larger than n is a usage problem
    let out = spca()
        .args(["solve", "--input", path.to_str().unwrap(), "--format", "dense-csv", "--k", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    // unparseable file too, with a line number in the message
    std::fs::write(&path, "1.0,zzz\n0.0,2.0\n").unwrap();
    let out = spca()
        .args(["solve", "--input", path.to_str().unwrap(), "--format", "dense-csv", "--k", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));
}

#[test]
fn spiked_subcommand_matches_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("rec.csv");
    let out = spca()
        .args([
            "spiked", "--n", "40", "--m", "20", "--k", "10", "--trials", "8", "--seed", "11",
            "--d", "2", "--output",
        ])
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let report = recovery_experiment(&RecoveryConfig {
        n: 40,
        m: 20,
        k: 10,
        trials: 8,
        seed: 11,
        ..RecoveryConfig::default()
    })
    .unwrap();
    let csv = std::fs::read_to_string(&out_path).unwrap();
    for (i, method) in report.config.methods.iter().enumerate() {
        let expected = format!(
            "{},40,20,10,8,{},{}",
            method.label(),
            report.successes[i],
            report.p_rec(i)
        );
        assert!(csv.contains(&expected), "missing row {expected:?} in {csv}");
    }
}

#[test]
fn solve_result_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("a.csv");
    std::fs::write(&input, "5.0,0.5,0.0\n0.5,4.0,0.0\n0.0,0.0,1.0\n").unwrap();
    let output = dir.path().join("result.txt");
    let out = spca()
        .args([
            "solve",
            "--input",
            input.to_str().unwrap(),
            "--format",
            "dense-csv",
            "--k",
            "2",
            "--d",
            "1",
            "--output",
            output.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc = spannogram::io::read_result(&output).unwrap();
    assert_eq!(doc.k, 2);
    assert_eq!(doc.components.len(), 1);
    assert_eq!(doc.components[0].support, vec![0, 1]);
    assert!(doc.components[0].value > 5.0);
}
