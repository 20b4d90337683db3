//! The local-global search loop: a seed database built by local search,
//! then generations of training a transformer on the pool, sampling from it,
//! repairing samples by local search and merging the results back.

use std::path::PathBuf;

use patternboost_core::tokenizer::TokenizerError;
use patternboost_core::{PoolError, ProblemError};
use patternboost_transformer::TransformerError;
use thiserror::Error;

mod checkpoint;
mod config;
mod run;
mod stats;

pub use checkpoint::{latest_generation, GEN_PREFIX};
pub use config::{Mode, RunConfig, TokenizerKind, SEED_ENV};
pub use run::{resume, run, seed_database, RunState, END_OFFSET, START_OFFSET};
pub use stats::{histogram_csv, histogram_emit, parse_stats, stats_csv, GenerationStats};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("config: {0}")]
    Config(String),
    #[error("stats line {line}: {message}")]
    Stats { line: usize, message: String },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Tokenizer(#[from] TokenizerError),
    #[error(transparent)]
    Model(#[from] TransformerError),
    #[error("generation {generation}: training aborted: {source}")]
    Training {
        generation: usize,
        source: TransformerError,
    },
    #[error("generation {generation}: {path}: {source}")]
    Io {
        generation: usize,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("checkpoint {path}: {message}")]
    Checkpoint { path: PathBuf, message: String },
    #[error("worker pool: {0}")]
    Workers(String),
}
