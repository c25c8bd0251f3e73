//! End-to-end checks of the `fibra` binary: exit codes, overwrite guards,
//! and resume behavior.

use std::path::Path;
use std::process::{Command, Output};

fn fibra(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibra"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn help_and_version_exit_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&fibra(tmp.path(), &["--help"])), 0);
    assert_eq!(code(&fibra(tmp.path(), &["--version"])), 0);
    assert_eq!(code(&fibra(tmp.path(), &["phantom", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fibra(tmp.path(), &["--no-such-flag"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());

    let out = fibra(tmp.path(), &["not-a-subcommand"]);
    assert_eq!(code(&out), 1);

    // A config file that parses but fails validation is a usage error too.
    std::fs::write(tmp.path().join("bad.toml"), "ng = 1\n").unwrap();
    let out = fibra(tmp.path(), &["--config", "bad.toml", "phantom", "--n", "4"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_inputs_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    // No cohort manifest yet.
    let out = fibra(tmp.path(), &["extract"]);
    assert_eq!(code(&out), 2);

    let out = fibra(tmp.path(), &["--config", "absent.toml", "evaluate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn phantom_refuses_overwrite_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fibra(
        tmp.path(),
        &["--seed", "3", "phantom", "--n", "4", "--prevalence", "0.5"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let out = fibra(
        tmp.path(),
        &["--seed", "3", "phantom", "--n", "4", "--prevalence", "0.5"],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));

    let out = fibra(
        tmp.path(),
        &["--seed", "3", "--force", "phantom", "--n", "4", "--prevalence", "0.5"],
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn extract_resume_reuses_rows_and_keeps_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = fibra(
        tmp.path(),
        &["--seed", "9", "phantom", "--n", "6", "--prevalence", "0.5"],
    );
    assert_eq!(code(&out), 0);

    let out = fibra(tmp.path(), &["--seed", "9", "extract"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let features = tmp.path().join("out").join("features.csv");
    let first = std::fs::read(&features).unwrap();

    // Plain rerun refuses to clobber; --resume reuses every cached row.
    let out = fibra(tmp.path(), &["--seed", "9", "extract"]);
    assert_eq!(code(&out), 2);
    let out = fibra(tmp.path(), &["--seed", "9", "--resume", "extract"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("6 reused"));
    assert_eq!(std::fs::read(&features).unwrap(), first);

    // --force recomputes from scratch to identical bytes (same seed).
    let out = fibra(tmp.path(), &["--seed", "9", "--force", "extract"]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&features).unwrap(), first);
}
