use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use phs_cli::{run_batch, Command, Options};

#[derive(Parser)]
#[command(name = "phs", version, about = "Analyze, simulate and verify interface port-Hamiltonian systems")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario files; several files run in parallel.
    #[arg(required = true)]
    configs: Vec<PathBuf>,
    /// Output directory for reports, CSV files and summaries.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the `seed` of every scenario.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the boundary conditions and report the family constant.
    Analyze(Common),
    /// Run the structure-preserving simulation and write CSV plus summary.
    Simulate(Common),
    /// Locate eigenvalues in the configured region.
    Spectrum(Common),
    /// Run the property suites and print a pass/fail table.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run only this suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common, suite) = match cli.cmd {
        Cmd::Analyze(c) => (Command::Analyze, c, None),
        Cmd::Simulate(c) => (Command::Simulate, c, None),
        Cmd::Spectrum(c) => (Command::Spectrum, c, None),
        Cmd::Verify { common, suite } => (Command::Verify, common, suite),
    };
    let opts = Options { out: common.out, suite, seed: common.seed };
    let mut code = 0;
    for item in run_batch(cmd, &common.configs, &opts) {
        match item.result {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("{}: {e}", item.config.display());
                code = code.max(e.exit_code());
            }
        }
    }
    ExitCode::from(code)
}
