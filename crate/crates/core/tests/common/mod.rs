#![allow(dead_code)]

pub mod synth;

use std::path::PathBuf;
use std::process::Command;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.json"))
}

pub fn golden(name: &str, command: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/golden")
        .join(format!("{name}.{command}.json"))
}

pub struct CliRun {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn run_cli(command: &str, name: &str) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_ncdisint"))
        .arg(command)
        .arg(fixture(name))
        .env_remove("NCDISINT_TOLERANCE")
        .output()
        .expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs the command twice and compares both outputs with the checked-in
/// golden file. With `NCDISINT_BLESS=1` the golden file is rewritten instead.
pub fn golden_check(command: &str, name: &str) -> Result<(), String> {
    let first = run_cli(command, name);
    let second = run_cli(command, name);
    if first.code != 0 {
        return Err(format!("{command} {name}: exit {} ({})", first.code, first.stderr.trim()));
    }
    if first.stdout != second.stdout {
        return Err(format!("{command} {name}: two runs differ"));
    }
    let path = golden(name, command);
    if std::env::var_os("NCDISINT_BLESS").is_some() {
        std::fs::write(&path, &first.stdout).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected != first.stdout {
        return Err(format!("{command} {name}: output differs from {}", path.display()));
    }
    Ok(())
}

pub fn diagonal_fixtures() -> Vec<String> {
    (0..20).map(|k| format!("diagonal_{k:02}")).collect()
}

pub const CLASSICAL_FIXTURES: [&str; 3] = ["classical_fiber", "classical_null", "classical_general"];

/// Names of every top-level fixture, sorted.
pub fn fixture_names() -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .expect("fixture directory exists")
        .filter_map(|e| {
            let path = e.ok()?.path();
            if path.extension()? != "json" {
                return None;
            }
            Some(path.file_stem()?.to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    names
}
