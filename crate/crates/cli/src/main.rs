use av_euler::driver::Mode;
use av_euler_cli::config::Config;
use av_euler_cli::{execute, info, Failure};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Periodic-box Euler solver in back-to-labels form.
///
/// Thread count follows RAYON_NUM_THREADS.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override a config entry, e.g. `time.t_end=0.2`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// No progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run in the mode named by `mode.kind`.
    Run { config: PathBuf },
    /// Successive approximations on [0, time.t_end].
    Picard { config: PathBuf },
    /// Direct run alongside the vorticity-form oracle.
    Compare { config: PathBuf },
    /// Describe a snapshot from its JSON sidecar.
    Info { snapshot: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(lines) => {
            if !cli.quiet {
                lines.iter().for_each(|l| println!("{l}"));
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error[{}]: {f}", f.category());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Vec<String>, Failure> {
    let (path, forced) = match &cli.command {
        Command::Info { snapshot } => return info(snapshot),
        Command::Run { config } => (config, None),
        Command::Picard { config } => (config, Some(Mode::Picard)),
        Command::Compare { config } => (config, Some(Mode::OracleCompare)),
    };
    let cfg = Config::load(path, &cli.overrides)?;
    let mode = match forced {
        Some(m) => m,
        None => cfg.mode()?,
    };
    let quiet = cli.quiet;
    let summary = execute(&cfg, mode, |line| {
        if !quiet {
            eprintln!("{line}");
        }
    })?;
    Ok(summary.lines)
}
