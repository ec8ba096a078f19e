//! `weilgraph`: multiplicator ladders, overorders and isogeny graphs of Weil
//! polynomials from the command line.

mod commands;
mod config;
mod expr;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use weilgraph::error::Error;

#[derive(Parser, Debug)]
#[command(
    name = "weilgraph",
    version,
    about = "Multiplicator ladders and isogeny graphs of Weil polynomials"
)]
pub struct Cli {
    /// key = value file supplying defaults for any long flag
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The l-multiplicator ladder of an order at a singular prime
    Ladder(LadderArgs),
    /// All overorders of an order with their Hasse diagram
    Overorders(OverorderArgs),
    /// Residue size and splitting type of every singular prime
    ClassifyPrime(ClassifyArgs),
    /// The (R,l)-isogeny graph built from class data
    Graph(GraphArgs),
    /// Structural and predicted volcano verdicts per component
    VolcanoCheck(GraphArgs),
    /// Resolve an LMFDB label to its Weil polynomial
    Fetch(FetchArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// LMFDB isogeny-class label, e.g. 3.25.g_cg_ji
    #[arg(long)]
    pub label: Option<String>,
    /// JSON file {"h": [c0, c1, ..., 1], "q": q} with h low degree first
    #[arg(long, value_name = "FILE")]
    pub poly: Option<PathBuf>,
    /// Never touch the network; use the cache and bundled fixtures only
    #[arg(long)]
    pub offline: bool,
    /// Factorization of the index hint, e.g. "2^4,3^2,5"
    #[arg(long, value_name = "P^E,...")]
    pub factor_hint: Option<String>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct PrimeArgs {
    /// Rational prime below the maximal ideal
    #[arg(long)]
    pub ell: Option<u64>,
    /// Keep only maximal ideals with this residue field size
    #[arg(long)]
    pub residue_size: Option<u64>,
    /// Position among the remaining candidates in canonical order
    #[arg(long)]
    pub index: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Write JSON to FILE ("-" for stdout instead of the text report)
    #[arg(long, value_name = "FILE")]
    pub json: Option<String>,
    /// Write Graphviz DOT to FILE ("-" for stdout)
    #[arg(long, value_name = "FILE")]
    pub dot: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct LadderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub prime: PrimeArgs,
    /// Z[pi,q/pi], Z[pi], Z[g1,...], maximal or auto
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OverorderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Z[pi,q/pi], Z[pi], Z[g1,...] or maximal
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Restrict to primes above this rational prime
    #[arg(long)]
    pub ell: Option<u64>,
    /// Z[pi,q/pi], Z[pi], Z[g1,...] or maximal
    #[arg(long)]
    pub order: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub prime: PrimeArgs,
    /// auto (base order below Z[pi,q/pi]), Z[pi,q/pi], Z[g1,...] or maximal
    #[arg(long)]
    pub order: Option<String>,
    /// imquad, or file:PATH with external class data
    #[arg(long, value_name = "SOURCE")]
    pub class_data: Option<String>,
    /// Orbit count N, overriding the theory and the class data file
    #[arg(long)]
    pub n: Option<u64>,
    /// Deepest realized level, overriding the theory and the class data file
    #[arg(long)]
    pub d_min: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FetchArgs {
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long)]
    pub offline: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A failure with its exit code.
pub enum Failure {
    Usage(String),
    Domain(Error),
    Io(String),
    /// The built graph contradicts the theorems it was built from.
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn report(&self) -> (u8, serde_json::Value) {
        let (code, module, tag, message) = match self {
            Failure::Usage(m) => (2, "cli", "usage", m.clone()),
            Failure::Io(m) => (1, "cli", "io", m.clone()),
            Failure::Internal(m) => (1, "volcano", "internal_inconsistency", m.clone()),
            Failure::Domain(e) => {
                let exit = if matches!(e, Error::BadLabel(_)) {
                    2
                } else {
                    1
                };
                (exit, e.module(), e.code(), e.to_string())
            }
        };
        (
            code,
            serde_json::json!({ "module": module, "code": tag, "message": message }),
        )
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, json) = f.report();
            eprintln!("{json}");
            ExitCode::from(code)
        }
    }
}
