//! Constructions, pools, problem definitions, tokenizers and verification
//! oracles for a transformer-guided local search over extremal combinatorics
//! problems.

pub mod construction;
pub mod oracles;
pub mod pool;
pub mod problems;
pub mod rng;
pub mod tokenizer;

pub use construction::{Construction, ProblemId, Score, ScoredConstruction};
pub use pool::{Pool, PoolError};
pub use problems::{Problem, ProblemError, ProblemSpec};
pub use rng::SearchRng;
