//! `hnstrat`: batch JSON front end.
//!
//! Exit status is 0 on success, 2 when the input cannot be read or parsed
//! and 3 when the computation rejects it. A negative verdict is data, not
//! a failure.

mod commands;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use commands::{CliError, Options};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    IndexSet,
    Stratum,
    ZMember,
    YMember,
    Retract,
    Epsilon,
    RefineCheck,
    Hm,
    BetaTau,
    VerifyMin,
    CharIdentity,
    GradedWeight,
    HnSum,
    ThetaCheck,
    Cross,
    PerturbedHm,
    Gamma,
    SEquiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Asymptotic,
    AtN,
}

#[derive(Debug, Parser)]
#[command(name = "hnstrat", version, about = "Exact instability strata and θ-stability calculus")]
struct Cli {
    verb: Verb,
    #[arg(long)]
    input: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<i64>,
    #[arg(long)]
    m: Option<i64>,
    /// Enumeration cap (weights for strata, atoms for profiles).
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Asymptotic)]
    mode: ModeArg,
    /// Positive rational `p/q`.
    #[arg(long)]
    epsilon: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = Options {
        seed: cli.seed,
        n: cli.n,
        m: cli.m,
        cap: cli.cap,
        mode: cli.mode,
        epsilon: cli.epsilon.clone(),
    };
    let outcome = fs::read_to_string(&cli.input)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", cli.input.display())))
        .and_then(|text| commands::run(cli.verb, &text, &opts));
    match outcome {
        Ok(report) => {
            let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
            text.push('\n');
            let written = match &cli.output {
                Some(path) => fs::write(path, text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(3)
        }
    }
}
