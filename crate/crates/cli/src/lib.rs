pub mod commands;
pub mod config;
pub mod contour;
pub mod render;
pub mod svg;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

pub use commands::Status;
pub use config::{Overrides, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_INPUT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "skinspec", version, about = "Spectra, winding regions, pseudospectra and skin-effect reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML (or .json) run configuration; optional for `verify`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing; optional for `verify`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// σ_det samples per curve.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Grid nodes per axis.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Seed for the randomized acceptance sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample the spectral curves σ_det → sigma_det.csv
    SigmaDet,
    /// Classify a λ-grid by winding → region.csv, region.svg
    WindingRegion,
    /// σ_min(A − λ) on a grid → sigma_min.csv, pseudospectrum.svg
    Pseudospectrum,
    /// Eigenmodes of a resonator chain → modes.csv, report.json, modes.svg
    SkinReport,
    /// Run the acceptance suite; exit 1 if any criterion fails
    Verify,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            samples: self.samples,
            resolution: self.resolution,
            seed: self.seed,
        }
    }

    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::load(path, self.overrides()),
            None if self.command == Command::Verify => Ok(RunConfig {
                seed: self.seed,
                ..RunConfig::default()
            }),
            None => bail!("--config is required"),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let cfg = cli.load()?;
    let out = match (&cli.out, cli.command) {
        (Some(dir), _) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            Some(dir.as_path())
        }
        (None, Command::Verify) => None,
        (None, _) => bail!("--out is required"),
    };
    match (cli.command, out) {
        (Command::Verify, out) => commands::verify(cfg.seed, out),
        (command, Some(out)) => match command {
            Command::SigmaDet => commands::sigma_det(&cfg, out),
            Command::WindingRegion => commands::winding_region(&cfg, out),
            Command::Pseudospectrum => commands::pseudospectrum(&cfg, out),
            Command::SkinReport => commands::skin_report(&cfg, out),
            Command::Verify => unreachable!(),
        },
        (_, None) => unreachable!("checked above"),
    }
}

/// Worker count from `SKINSPEC_THREADS`, if set.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("SKINSPEC_THREADS") {
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("SKINSPEC_THREADS={v:?} is not a count"))?;
            if n == 0 {
                bail!("SKINSPEC_THREADS must be positive");
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}
