// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use torpsido::harness::{self, Command, ExperimentConfig, EXIT_IO, EXIT_OK, EXIT_VALIDATION};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    Quantize,
    Assemble,
    Trace,
    Nuclearity,
    Decay,
    DecomposeRoundtrip,
    Spectrum,
    HeatTrace,
    Index,
    Ellipticity,
    HoermanderExperiment,
    /// Check the config against the preconditions of `--for` without computing.
    Validate,
}

/// Periodic and lattice pseudo-differential operator experiments.
#[derive(Debug, Parser)]
#[command(name = "torpsido", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report, tables and artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed and the family seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the numerical kernels.
    #[arg(long, env = "TORPSIDO_THREADS")]
    threads: Option<usize>,
    /// Command whose preconditions `validate` audits.
    #[arg(long = "for", value_enum)]
    target: Option<Cmd>,
}

fn to_command(c: Cmd) -> Option<Command> {
    Some(match c {
        Cmd::Quantize => Command::Quantize,
        Cmd::Assemble => Command::Assemble,
        Cmd::Trace => Command::Trace,
        Cmd::Nuclearity => Command::Nuclearity,
        Cmd::Decay => Command::Decay,
        Cmd::DecomposeRoundtrip => Command::DecomposeRoundtrip,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::HeatTrace => Command::HeatTrace,
        Cmd::Index => Command::Index,
        Cmd::Ellipticity => Command::Ellipticity,
        Cmd::HoermanderExperiment => Command::HoermanderExperiment,
        Cmd::Validate => return None,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("could not configure {k} threads: {e}");
            return ExitCode::from(EXIT_IO as u8);
        }
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_IO as u8);
        }
    };
    let mut cfg = match ExperimentConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config: {e}");
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    if let Some(s) = cli.seed {
        cfg = cfg.with_seed(s);
    }
    let Some(command) = to_command(cli.command) else {
        let Some(target) = cli.target.and_then(to_command) else {
            eprintln!("validate needs --for <command>");
            return ExitCode::from(EXIT_VALIDATION as u8);
        };
        let diagnostics = harness::validate(target, &cfg);
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return ExitCode::from(if diagnostics.is_empty() { EXIT_OK } else { EXIT_VALIDATION } as u8);
    };
    let outcome = harness::run(command, &cfg, &cli.out);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    for p in &outcome.written {
        println!("{}", p.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
