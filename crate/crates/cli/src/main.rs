//! Command-line frontend: parse problem JSON, dispatch to the solvers,
//! searches and synthesizers, and emit report JSON / CSV artifacts.

mod io;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_PARSE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "convint",
    about = "Exact Riemann solvers, phase-space geometry and fan-subsolution machinery \
             for the multi-dimensional compressible Euler equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Riemann problem exactly and report the wave fan
    Riemann {
        #[arg(long, value_parser = ["isen", "full"])]
        system: String,
        /// input JSON file (see README for the schema)
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        /// inline input JSON
        #[arg(long)]
        json: Option<String>,
        /// write the fan report JSON here (stdout otherwise)
        #[arg(long)]
        out: Option<PathBuf>,
        /// sample the self-similar solution to CSV on a ray grid
        #[arg(long)]
        csv: Option<PathBuf>,
        /// number of ray samples for the CSV dump
        #[arg(long, default_value_t = 201)]
        grid: usize,
    },
    /// Classify isentropic Riemann data against the 18-row structure table
    Classify {
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        #[arg(long)]
        json: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a fan subsolution (isentropic SR grid search or the
    /// full-Euler continuation)
    FanSearch {
        #[arg(long, value_parser = ["isen", "full"])]
        system: String,
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        #[arg(long)]
        json: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// isentropic only: patch large rarefactions through an auxiliary state
        #[arg(long, default_value_t = false)]
        aux_patch: bool,
        /// density grid size for the isentropic search
        #[arg(long, default_value_t = 48)]
        grid: usize,
    },
    /// Verify a candidate produced by fan-search; exit 0 iff it passes
    FanVerify {
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        #[arg(long)]
        json: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// override the scale-relative residual threshold (default: the
        /// built-in 1e-9 isentropic / 1e-8 full bounds)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Synthesize an oscillatory wedge field from an isentropic candidate:
    /// CSV field dump plus an I-vs-k trace
    Oscillate {
        /// fan-search output JSON (isentropic)
        #[arg(long, conflicts_with = "json")]
        input: Option<PathBuf>,
        #[arg(long)]
        json: Option<String>,
        /// oscillation frequency index
        #[arg(long, default_value_t = 64)]
        k: usize,
        /// quadrature order for the functional trace
        #[arg(long, default_value_t = 8)]
        quad: usize,
        /// uniform grid resolution per axis for the CSV dump
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// CSV dump of the sampled field
        #[arg(long)]
        csv: Option<PathBuf>,
        /// JSON trace of the functional over the frequency ladder
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; exit 0 iff all checks pass
    Check {
        /// sampling seed
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn parse(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }

    fn domain(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DOMAIN,
            message: msg.into(),
        }
    }

    fn infeasible(msg: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INFEASIBLE,
            message: msg.into(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Riemann {
            system,
            input,
            json,
            out,
            csv,
            grid,
        } => io::cmd_riemann(&system, input, json, out, csv, grid),
        Command::Classify { input, json, out } => io::cmd_classify(input, json, out),
        Command::FanSearch {
            system,
            input,
            json,
            out,
            aux_patch,
            grid,
        } => io::cmd_fan_search(&system, input, json, out, aux_patch, grid),
        Command::FanVerify {
            input,
            json,
            out,
            tol,
        } => io::cmd_fan_verify(input, json, out, tol),
        Command::Oscillate {
            input,
            json,
            k,
            quad,
            grid,
            csv,
            out,
        } => io::cmd_oscillate(input, json, k, quad, grid, csv, out),
        Command::Check { seed } => {
            let results = convint::selfcheck::run_all(seed);
            let mut all = true;
            for r in &results {
                println!("{}", r.line());
                all &= r.pass;
            }
            if all {
                Ok(())
            } else {
                Err(CliError::domain("acceptance checks failed"))
            }
        }
    }
}
