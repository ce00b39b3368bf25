//! Run orchestration: configuration, training, Monte Carlo evaluation and
//! comparison reports.

mod config;
mod report;
mod run;

pub use config::{PolicyKind, RunConfig, RunFile};
pub use report::{compare, read_episode_csv, write_episode_csv, CompareReport, EpisodeRecord, StatsTable};
pub use run::{
    characterize_altimeter, evaluate, evaluate_drdv, evaluate_policy, load_checkpoint, run_dir, train, EvalReport, TrainReport,
    ALTIMETER_ELEVATIONS, CHECKPOINT_FILE, EVAL_FILE, LEARNING_CURVE_FILE, STATS_FILE,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::altimeter::TerrainError;
use crate::envs::ConfigError;
use crate::nets::CheckpointError;
use crate::ppo::PpoError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Scenario(#[from] ConfigError),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: CheckpointError,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("training diverged after {updates} updates; last good checkpoint kept: {source}")]
    Diverged {
        updates: usize,
        #[source]
        source: PpoError,
    },
    #[error("no evaluation results for {policy} at {path}")]
    MissingRun { policy: String, path: PathBuf },
    #[error("{0} cannot be trained")]
    NotTrainable(String),
}

impl HarnessError {
    /// Stable short code for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Scenario(_) => "scenario",
            Self::Terrain(_) => "terrain",
            Self::Io { .. } => "io",
            Self::Checkpoint { .. } => "checkpoint",
            Self::Csv { .. } => "csv",
            Self::Diverged { .. } => "numerical-divergence",
            Self::MissingRun { .. } => "missing-run",
            Self::NotTrainable(_) => "not-trainable",
        }
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}

pub(crate) fn csv_err(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Csv { path, source }
}
