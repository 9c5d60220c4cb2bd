//! Scenario-driven batch runner for the lplab engines.
//!
//! Exit codes: 0 success, 1 validation error (bad arguments or
//! configuration), 2 runtime/engine error, 3 verification-suite failure.

use lplab_cli::{runner, scenario};

use clap::{Parser, Subcommand};
use lplab_core::suite::{self, Check, CheckKind};
use lplab_cli::runner::RunError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lplab", about = "Structure-preserving Lie-Poisson and phase-transport runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON configuration file.
    Run {
        /// Path to the configuration document.
        config: PathBuf,
        /// Directory for output files.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Seed recorded with the run (runs are deterministic).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification suite: conservation, oracles, or all.
    Suite {
        /// Suite name.
        name: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Run { config, out_dir, seed } => run_command(&config, &out_dir, seed),
        Command::Suite { name } => suite_command(&name),
    }
}

fn run_command(config: &Path, out_dir: &Path, seed: u64) -> ExitCode {
    let text = match std::fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("validation error: cannot read {}: {e}", config.display());
            return ExitCode::from(1);
        }
    };
    let scenario = match scenario::parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("validation error: {e}");
            return ExitCode::from(1);
        }
    };
    match runner::run_scenario(&scenario, out_dir, seed) {
        Ok(summary) => {
            for line in &summary.lines {
                println!("{line}");
            }
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            println!("wall time: {:.3}s", summary.wall_seconds);
            ExitCode::SUCCESS
        }
        Err(RunError::Validation(m)) => {
            eprintln!("validation error: {m}");
            ExitCode::from(1)
        }
        Err(RunError::Engine(m)) => {
            eprintln!("engine error: {m}");
            ExitCode::from(2)
        }
    }
}

fn suite_command(name: &str) -> ExitCode {
    let checks = match name {
        "conservation" => suite::conservation_checks(),
        "oracles" => suite::oracle_checks(),
        "all" => suite::all_checks(),
        other => {
            eprintln!(
                "validation error: unknown suite '{other}'; valid names: conservation, oracles, all"
            );
            return ExitCode::from(1);
        }
    };
    let checks = match checks {
        Ok(c) => c,
        Err(e) => {
            eprintln!("engine error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut all_ok = true;
    println!("{:<34} {:<14} result", "check", "group");
    println!("{}", "-".repeat(60));
    for Check { name, kind, passed, details } in &checks {
        let group = match kind {
            CheckKind::Conservation => "conservation",
            CheckKind::Oracle => "oracle",
        };
        println!("{name:<34} {group:<14} {}", if *passed { "PASS" } else { "FAIL" });
        for d in details {
            println!("    {d}");
        }
        all_ok &= passed;
    }
    if all_ok {
        println!("suite '{name}': all {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("suite '{name}': FAILURES present");
        ExitCode::from(3)
    }
}
