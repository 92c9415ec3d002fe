use std::path::PathBuf;
use std::sync::OnceLock;

use chabauty_cli::fixtures;
use chabauty_cli::pipeline::{recheck, verify, Certificate, RunOptions};
use chabauty_cli::problem::Problem;
use chabauty_core::mwsieve::Outcome;
use chabauty_core::par::{self, Execution};

fn case_i1() -> Problem {
    fixtures::problem_file("case_i1").unwrap().validate().unwrap()
}

fn sequential_certificate() -> &'static Certificate {
    static CERT: OnceLock<Certificate> = OnceLock::new();
    CERT.get_or_init(|| verify(&case_i1(), &RunOptions { exec: Execution::Sequential, seed: None }).unwrap())
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/case_i1.cert.json")
}

/// Set `UPDATE_GOLDEN=1` to rewrite the stored certificate.
#[test]
fn matches_the_golden_certificate() {
    let text = sequential_certificate().to_canonical();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_path().parent().unwrap()).unwrap();
        std::fs::write(golden_path(), &text).unwrap();
    }
    let golden = std::fs::read_to_string(golden_path()).unwrap();
    assert_eq!(text, golden);
    assert_eq!(Certificate::from_json(&golden).unwrap().to_canonical(), golden);
    assert_eq!(sequential_certificate().outcome, Outcome::Certified);
}

#[test]
fn parallel_run_is_byte_identical() {
    let par_cert =
        par::with_threads(Some(2), || verify(&case_i1(), &RunOptions { exec: Execution::Parallel, seed: None })).unwrap();
    assert_eq!(par_cert.to_canonical(), sequential_certificate().to_canonical());
}

#[test]
fn recheck_accepts_another_seed_and_thread_count() {
    let opts = RunOptions { exec: Execution::Parallel, seed: Some(99) };
    let rep = par::with_threads(Some(3), || recheck(&case_i1(), sequential_certificate(), &opts)).unwrap();
    assert!(rep.ok(), "{:?}", rep.problems);
}

#[test]
fn tampered_certificates_fail_recheck() {
    let opts = RunOptions { exec: Execution::Sequential, seed: None };
    let problem = case_i1();

    let mut cert = sequential_certificate().clone();
    cert.sieve.lattice[0][0] = "1".into();
    assert!(!recheck(&problem, &cert, &opts).unwrap().ok());

    let mut cert = sequential_certificate().clone();
    cert.saturation.clear();
    assert!(!recheck(&problem, &cert, &opts).unwrap().ok());

    let mut cert = sequential_certificate().clone();
    cert.problem_hash = "0".repeat(64);
    assert!(!recheck(&problem, &cert, &opts).unwrap().ok());
}
