use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlod_cli::commands::{analyze, norms, plot, selftest, verify};
use nlod_cli::{CliError, OutputFormat, RunConfig};

/// Solution structure of nonlocal overdetermined problems.
#[derive(Parser)]
#[command(name = "nlod", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce the instance, solve for all roots and report the solutions.
    Analyze(ConfigArgs),
    /// Check every constructed solution against the nonlocal PDE.
    Verify(ConfigArgs),
    /// Closed-form norms of the base solution against quadrature.
    Norms(ConfigArgs),
    /// Write g(s), the target and root markers as CSV.
    PlotData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run built-in instances with known answers.
    Selftest,
}

#[derive(clap::Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(long, value_enum)]
    output: Option<OutputFormat>,
}

impl ConfigArgs {
    fn load(&self) -> Result<(RunConfig, OutputFormat), CliError> {
        let cfg = RunConfig::load(&self.config)?;
        let format = self.output.unwrap_or(cfg.output);
        Ok((cfg, format))
    }
}

/// Rendered output and whether all checks passed.
fn dispatch(cli: Cli) -> Result<(String, bool), CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let (cfg, format) = args.load()?;
            Ok((
                analyze::render(&analyze::analyze(&cfg)?.report, format),
                true,
            ))
        }
        Command::Verify(args) => {
            let (cfg, format) = args.load()?;
            let report = verify::run(&cfg)?;
            Ok((verify::render(&report, format), report.passed))
        }
        Command::Norms(args) => {
            let (cfg, format) = args.load()?;
            let report = norms::run(&cfg)?;
            Ok((norms::render(&report, format), report.passed))
        }
        Command::PlotData { config, out } => {
            Ok((plot::run(&RunConfig::load(&config)?, &out)?, true))
        }
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok((text, passed)) => {
            print!("{text}");
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
