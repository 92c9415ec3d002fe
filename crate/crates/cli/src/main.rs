use std::path::PathBuf;
use std::process::ExitCode;

use chabauty_cli::pipeline::{self, Certificate, RunOptions};
use chabauty_cli::problem::{load_problem, Problem};
use chabauty_cli::report::{self, Report};
use chabauty_core::par::{self, Execution};
use clap::{Parser, Subcommand, ValueEnum};

/// Exit codes by failure class.
mod exit {
    pub const OK: u8 = 0;
    /// The computation finished but did not prove the statement.
    pub const NOT_PROVEN: u8 = 1;
    pub const BAD_INPUT: u8 = 2;
    pub const COMPUTATION: u8 = 3;
    pub const RECHECK_FAILED: u8 = 4;
    pub const IO: u8 = 5;
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "chabauty", version, about = "Certify the rational points of genus-2 curves over number fields")]
struct Cli {
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Override the seed in the problem file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Saturation, sieve and criterion; writes a certificate.
    Verify {
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The criterion at every place above one prime.
    Criterion {
        problem: PathBuf,
        #[arg(long)]
        p: u64,
        /// Index of a single known point.
        #[arg(long)]
        point: Option<usize>,
    },
    /// Run the sieve and print the chain of lattices and coset sets.
    Sieve {
        problem: PathBuf,
        /// Prime whose places go first.
        #[arg(long)]
        target: Option<u64>,
    },
    /// Show that no prime below the bound divides the index of the subgroup.
    Saturate {
        problem: PathBuf,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Order and structure of the Jacobian at the places above a prime.
    Jacstats {
        problem: PathBuf,
        #[arg(long)]
        p: u64,
    },
    /// Replay a certificate against its problem.
    Recheck {
        problem: PathBuf,
        certificate: PathBuf,
    },
    /// Certify every bundled curve and solve x² + y³ = z¹⁰.
    Fermat2310,
}

fn emit<R: Report>(format: Format, r: &R) -> u8 {
    match format {
        Format::Text => print!("{}", r.text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(r).expect("reports serialize")),
    }
    if r.success() {
        exit::OK
    } else {
        exit::NOT_PROVEN
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn load(path: &PathBuf) -> Result<Problem, u8> {
    load_problem(path).map_err(|e| fail(exit::BAD_INPUT, e))
}

fn run(cli: Cli) -> u8 {
    let opts = RunOptions {
        exec: if cli.sequential { Execution::Sequential } else { Execution::Parallel },
        seed: cli.seed,
    };
    let format = cli.format;
    let outcome = (|| -> Result<u8, u8> {
        let computation = |e: &dyn std::fmt::Display| fail(exit::COMPUTATION, e);
        Ok(match &cli.command {
            Command::Verify { problem, out } => {
                let pr = load(problem)?;
                let r = report::verify(&pr, &opts).map_err(|e| computation(&e))?;
                if let Some(path) = out {
                    std::fs::write(path, r.certificate.to_canonical()).map_err(|e| fail(exit::IO, e))?;
                }
                emit(format, &r)
            }
            Command::Criterion { problem, p, point } => {
                let pr = load(problem)?;
                emit(format, &report::criterion(&pr, *p, *point, &opts).map_err(|e| computation(&e))?)
            }
            Command::Sieve { problem, target } => {
                let pr = load(problem)?;
                emit(format, &report::sieve(&pr, *target, &opts).map_err(|e| computation(&e))?)
            }
            Command::Saturate { problem, bound } => {
                let pr = load(problem)?;
                let b = bound.unwrap_or(pr.file.smoothness_bound);
                emit(format, &report::saturate(&pr, b, &opts).map_err(|e| computation(&e))?)
            }
            Command::Jacstats { problem, p } => {
                let pr = load(problem)?;
                emit(format, &report::jacstats(&pr, *p, &opts).map_err(|e| computation(&e))?)
            }
            Command::Recheck { problem, certificate } => {
                let pr = load(problem)?;
                let text = std::fs::read_to_string(certificate).map_err(|e| fail(exit::IO, e))?;
                let cert = Certificate::from_json(&text).map_err(|e| fail(exit::BAD_INPUT, e))?;
                let rep = pipeline::recheck(&pr, &cert, &opts).map_err(|e| computation(&e))?;
                let summary = report::RecheckSummary { problem: pr.file.name.clone(), report: rep };
                match emit(format, &summary) {
                    exit::OK => exit::OK,
                    _ => exit::RECHECK_FAILED,
                }
            }
            Command::Fermat2310 => emit(format, &report::fermat2310(&opts).map_err(|e| computation(&e))?),
        })
    })();
    outcome.unwrap_or_else(|code| code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    ExitCode::from(par::with_threads(threads, || run(cli)))
}
