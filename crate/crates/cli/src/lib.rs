//! Command-line driver: simulate, order, fit, sample, attack, evaluate and
//! sweep truncation levels. Every command writes its outputs and a
//! `manifest.json` into `--out-dir`.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;

use anyhow::{Context, Result};
use clap::Parser;

pub use args::Cli;
use args::Command;
use manifest::RunManifest;

/// Parses `argv` (program name first) and runs the command.
pub fn run_args(argv: &[String]) -> Result<()> {
    let cli = Cli::try_parse_from(argv).map_err(|e| error::usage(e.to_string()))?;
    run(&cli, argv)
}

pub fn run(cli: &Cli, argv: &[String]) -> Result<()> {
    let r = cli.response.as_str();
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a, argv),
        Command::Order(a) => commands::cmd_order(a, r, argv),
        Command::Fit(a) => commands::cmd_fit(a, r, argv),
        Command::Sample(a) => commands::cmd_sample(a, argv),
        Command::Attack(c) => commands::cmd_attack(c, r, argv),
        Command::Utility(a) => commands::cmd_utility(a, r, argv),
        Command::Fidelity(a) => commands::cmd_fidelity(a, r, argv),
        Command::Sweep(a) => commands::cmd_sweep(a, r, argv),
        Command::Replay(a) => {
            let m: RunManifest = io::read_json(&a.manifest)?;
            let mut args = m.args.clone();
            if let Some(dir) = &a.out_dir {
                args = with_out_dir(&args, &dir.display().to_string());
            }
            run_args(&args).with_context(|| format!("replaying {}", a.manifest.display()))
        }
    }
}

/// Replaces (or appends) `--out-dir` in a recorded argument vector.
fn with_out_dir(args: &[String], dir: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len() + 2);
    let mut it = args.iter();
    let mut replaced = false;
    while let Some(a) = it.next() {
        if a == "--out-dir" {
            it.next();
            out.extend(["--out-dir".to_string(), dir.to_string()]);
            replaced = true;
        } else if a.starts_with("--out-dir=") {
            out.push(format!("--out-dir={dir}"));
            replaced = true;
        } else {
            out.push(a.clone());
        }
    }
    if !replaced {
        out.extend(["--out-dir".to_string(), dir.to_string()]);
    }
    out
}
