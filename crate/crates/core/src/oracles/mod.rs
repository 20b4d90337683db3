//! Independent reference implementations: exhaustive optima for tiny
//! instances, structure counts by enumeration, and verification of stored
//! constructions.
//!
//! Nothing here reuses the fast routines in [`crate::problems`]; the two are
//! compared in tests.

use thiserror::Error;

use crate::construction::ProblemId;
use crate::problems::ProblemError;

pub mod brute;
pub mod count;
pub mod fixtures;

pub use brute::{brute_best, brute_limit, contains_312, naive_permanent};
pub use count::{
    cospherical_count, count_312, count_chains, count_four_cycles, count_isosceles, count_triangles, five_point_det,
    grid_cospherical_count, longest_chain,
};
pub use fixtures::{
    embedded_fixtures, load_dir, verify_all, verify_fixture, Assertion, Claim, Fixture, FixtureData, FixtureError,
    FIXTURE_NAMES,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{problem} at size {size} is beyond the exhaustive-search bound ({bound})")]
    TooLarge {
        problem: ProblemId,
        size: usize,
        bound: String,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
