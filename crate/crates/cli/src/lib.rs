//! Front end for the `lmep` binary: configuration, subcommands and output.

pub mod closed_form;
pub mod commands;
pub mod config;
pub mod table;

use std::fs;
use std::io::Write;

use anyhow::{Context, Result};
use clap::Parser;

pub use commands::{execute, Artifact, Body};
pub use config::{Command, Flags, Format, PolicyArg, RunConfig};
pub use table::{Cell, Table};

#[derive(Debug, Parser)]
#[command(name = "lmep", version, about = "Harvested local exponential propagators: weights, benchmark runs and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Write the artifacts. `run` with `--out DIR` writes every artifact to
/// `DIR/<name>.<ext>`; otherwise the primary artifact goes to `--out` or
/// `stdout` and the rest are printed.
pub fn emit(cfg: &RunConfig, artifacts: &[Artifact], stdout: &mut dyn Write) -> Result<()> {
    if cfg.command == Command::Run {
        if let Some(dir) = &cfg.out {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for a in artifacts {
                let path = dir.join(format!("{}.{}", a.name, a.extension(cfg.format)));
                fs::write(&path, a.render(cfg)).with_context(|| format!("writing {}", path.display()))?;
            }
        } else {
            for a in artifacts.iter().filter(|a| a.name != "snapshots" && a.name != "config") {
                stdout.write_all(a.render(cfg).as_bytes())?;
            }
        }
        return Ok(());
    }
    for a in artifacts {
        match (&cfg.out, a.primary) {
            (Some(path), true) => {
                fs::write(path, a.render(cfg)).with_context(|| format!("writing {}", path.display()))?;
            }
            _ => stdout.write_all(a.render(cfg).as_bytes())?,
        }
    }
    Ok(())
}

pub fn main_with(cli: Cli) -> Result<()> {
    let cfg = RunConfig::load(cli.command, &cli.flags)?;
    if let Some(threads) = cfg.threads {
        // Fails only if a pool already exists, which then stays in charge.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let artifacts = execute(&cfg)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    emit(&cfg, &artifacts, &mut lock)?;
    lock.flush()?;
    Ok(())
}
