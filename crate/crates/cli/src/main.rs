//! `mehler-bridge`: batch front end for closed-form kernels, symbols,
//! propagation, verification and Schrödinger bridges.

// `!(a > b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::output::Sink;

#[derive(Debug, Parser)]
#[command(name = "mehler-bridge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluations.
    #[arg(long, env = "MB_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the kernel at probe pairs.
    KernelEval(Common),
    /// Evaluate the Weyl symbol at phase-space points.
    SymbolEval(Common),
    /// Propagate initial data on a grid.
    Propagate(Common),
    /// Run the verification suite.
    Verify(Common),
    /// Solve a discrete Schrödinger bridge.
    Bridge(Common),
}

fn init_threads(flag: Option<usize>, config: Option<usize>) -> CliResult<()> {
    let Some(n) = flag.or(config) else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn base_dir(config: &Path) -> PathBuf {
    config.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::KernelEval(c) => {
            let cfg: config::KernelEvalConfig = config::load(&c.config)?;
            init_threads(c.threads, cfg.threads)?;
            commands::kernel_eval(&cfg, &Sink::new(c.out)?)
        }
        Command::SymbolEval(c) => {
            let cfg: config::SymbolEvalConfig = config::load(&c.config)?;
            init_threads(c.threads, cfg.threads)?;
            commands::symbol_eval(&cfg, &Sink::new(c.out)?)
        }
        Command::Propagate(c) => {
            let cfg: config::PropagateConfig = config::load(&c.config)?;
            init_threads(c.threads, cfg.threads)?;
            commands::propagate_cmd(&cfg, &base_dir(&c.config), &Sink::new(c.out)?)
        }
        Command::Verify(c) => {
            let cfg: config::VerifyConfig = config::load(&c.config)?;
            init_threads(c.threads, cfg.threads)?;
            commands::verify_cmd(&cfg, &Sink::new(c.out)?)
        }
        Command::Bridge(c) => {
            let cfg: config::BridgeConfig = config::load(&c.config)?;
            init_threads(c.threads, cfg.threads)?;
            let out = c.out.unwrap_or_else(|| PathBuf::from("."));
            commands::bridge_cmd(&cfg, &base_dir(&c.config), &Sink::new(Some(out))?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mehler-bridge: {e}");
            e.exit_code()
        }
    }
}
