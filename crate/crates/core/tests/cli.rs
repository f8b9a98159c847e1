//! End-to-end runs of the `qrng-audit` binary.

use std::path::Path;
use std::process::{Command, Output};

use qrng_audit::bitstream::read_packed;
use qrng_audit::cli::{EXIT_IO, EXIT_OK, EXIT_USAGE};
use qrng_audit::BitSequence;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrng-audit")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = bin(&["test", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert_eq!(bin(&[]).status.code(), Some(EXIT_USAGE));
    let out = bin(&["--help"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["generate", "ingest", "test", "experiment", "report"] {
        assert!(help.contains(sub), "{help}");
    }
}

#[test]
fn jobs_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.bits");
    let run = Command::new(env!("CARGO_BIN_EXE_qrng-audit"))
        .args(["generate", "--reference", "alternating", "--bits", "8", "--out", s(&out)])
        .env("QRNG_AUDIT_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(EXIT_USAGE));
    let run = Command::new(env!("CARGO_BIN_EXE_qrng-audit"))
        .args(["generate", "--reference", "alternating", "--bits", "8", "--out", s(&out)])
        .env("QRNG_AUDIT_JOBS", "2")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(EXIT_OK));
}

#[test]
fn ingest_large_csv_matches_in_memory_conversion() {
    let dir = tempfile::tempdir().unwrap();
    let qubits = 12;
    let rows = 100_000;
    let mut text = String::from("anneal_index");
    for q in 0..qubits {
        text.push_str(&format!(",q{}", 2 * q + 1));
    }
    text.push('\n');
    let mut state = 0x2545_F491_4F6C_DD1Du64;
    for r in 0..rows {
        text.push_str(&r.to_string());
        for _ in 0..qubits {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            text.push_str(if state >> 63 == 1 { ",+1" } else { ",-1" });
        }
        text.push('\n');
    }
    // In-memory conversion: every spin cell of the whole text, in order.
    let expected = BitSequence::from_bits(
        text.lines()
            .skip(1)
            .flat_map(|l| l.split(',').skip(1).map(|c| c == "+1").collect::<Vec<_>>()),
    );
    let csv = dir.path().join("spins.csv");
    std::fs::write(&csv, &text).unwrap();
    let bits = dir.path().join("spins.bits");
    let out = bin(&["ingest", "--spins", s(&csv), "--out", s(&bits)]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), (rows * qubits).to_string());
    assert_eq!(read_packed(&bits, None).unwrap(), expected);
}

#[test]
fn ingest_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "anneal_index,q0,q1,q2\n0,1,1,1\n1,1,1,-1\n2,-1,2,1\n").unwrap();
    let bits = dir.path().join("bad.bits");
    let out = bin(&["ingest", "--spins", s(&csv), "--out", s(&bits)]);
    assert_eq!(out.status.code(), Some(EXIT_IO));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 4, column 3"), "{err}");
    assert!(!bits.exists());
}

/// ChaCha seed 1 at 10^8 bits, every applicable test passing; frozen from
/// a single run.
#[test]
fn crypto_quality_hundred_million_bits_is_random() {
    let dir = tempfile::tempdir().unwrap();
    let bits = dir.path().join("chacha.bits");
    let gen = bin(&["generate", "--reference", "crypto_quality", "--seed", "1", "--bits", "100000000", "--out", s(&bits)]);
    assert_eq!(gen.status.code(), Some(EXIT_OK));
    let results = dir.path().join("results.json");
    let out = bin(&["test", "--bits", s(&bits), "--out", s(&results), "--format", "markdown"]);
    let report = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{report}");
    assert!(report.contains("chacha: random"), "{report}");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&results).unwrap()).unwrap();
    assert_eq!(doc["tests"].as_array().unwrap().len(), 15);
    assert_eq!(doc["bit_count"], 100_000_000);
}
