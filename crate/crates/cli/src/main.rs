use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sbalc_cli::commands::{cmd_reference, cmd_report, cmd_run, exit_code, Overrides};
use sbalc_cli::error::exit;
use sbalc_cli::CliError;

/// Model evidence by active-learning Bayesian cubature.
#[derive(Parser)]
#[command(name = "sbalc", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Problem configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the model-call budget.
    #[arg(long)]
    max_calls: Option<usize>,
    /// Directory for relative output paths.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, max_calls: self.max_calls, out_dir: self.out_dir.clone() }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the evidence and posterior; write report, history and samples.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Oracle evidence on the true log-likelihood.
    Reference {
        #[command(flatten)]
        common: Common,
        /// Brute-force sample size (multi-dimensional problems).
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        /// Use brute-force Monte Carlo even for 1-D problems.
        #[arg(long)]
        mcs: bool,
    },
    /// Pretty-print a stored report.
    Report {
        /// Report file written by `run`.
        path: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sbalc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<u8, CliError> {
    match cmd {
        Cmd::Run { common } => {
            let out = cmd_run(&common.config, &common.overrides())?;
            print!("{}", out.doc.summary());
            for p in &out.written {
                println!("wrote {}", p.display());
            }
            Ok(exit_code(out.report.termination_reason))
        }
        Cmd::Reference { common, n, mcs } => {
            let doc = cmd_reference(&common.config, n, mcs, &common.overrides())?;
            let json = doc.to_json();
            if let Some(dir) = &common.out_dir {
                sbalc_cli::report::write_file(&dir.join("reference.json"), &json)?;
            }
            print!("{json}");
            Ok(exit::CONVERGED)
        }
        Cmd::Report { path } => {
            print!("{}", cmd_report(&path)?.summary());
            Ok(exit::CONVERGED)
        }
    }
}
