//! Command-line front end for the `mmac` library: configuration parsing,
//! the four commands, and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use anyhow::{bail, Result};
use mmac::solver::Tolerances;

pub use config::RunConfig;
use output::{OutDir, Units};

/// Everything a command needs besides its own section of the config.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub units: Units,
    /// Tolerances handed to the solver; checks always use the defaults.
    pub solver: Tolerances,
}

impl RunOptions {
    pub fn new(config: RunConfig) -> Self {
        Self {
            seed: config.seed,
            out: config.output.dir.clone(),
            config,
            units: Units { bits: false },
            solver: Tolerances::default(),
        }
    }

    pub fn out_dir(&self) -> Result<OutDir> {
        match &self.out {
            Some(dir) => OutDir::create(dir),
            None => bail!("no output directory: pass --out or set output.dir"),
        }
    }
}

/// Result of a command: the files written and whether every check passed.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
}
