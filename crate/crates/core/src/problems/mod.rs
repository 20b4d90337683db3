//! Score functions, validity predicates and down-up local searches.
//!
//! Each problem works on a fixed-length payload of small integers (see
//! [`Problem::payload_len`] and [`Problem::alphabet`]). The local searches
//! follow one shape: greedily repair violations, then extend randomly until
//! no admissible move is left.

use thiserror::Error;

use crate::construction::{ProblemId, Score};
use crate::rng::SearchRng;

pub mod boxes;
pub mod cross_sperner;
pub mod graph;
pub mod hypercube;
pub mod isosceles;
pub mod matrix;
pub mod sperner;
pub mod sphere;

pub use boxes::{BoxCover, BoxCoverProblem};
pub use cross_sperner::{CrossSperner, SetFamilyTuple};
pub use graph::{C4Free, GraphBits, TriangleFree};
pub use hypercube::{CubeSubgraph, HypercubeDiameter};
pub use isosceles::{IsoscelesFree, PointSet2D};
pub use matrix::{BinaryMatrix, Permanent312};
pub use sperner::{SaturatedSperner, SetFamily};
pub use sphere::{NoFiveOnSphere, Point3, PointSet3D};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("payload has length {got}, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("payload value {value} at position {position} is outside 0..{alphabet}")]
    Value { position: usize, value: u8, alphabet: u8 },
    #[error("score {0} does not fit in a signed 64-bit integer")]
    ScoreOverflow(u128),
    #[error("{what} = {got} exceeds the supported limit {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// One extremal problem: everything the search loop needs to know about it.
pub trait Problem: Send + Sync {
    fn id(&self) -> ProblemId;

    /// Number of entries in a payload.
    fn payload_len(&self) -> usize;

    /// Payload entries lie in `0..alphabet()`.
    fn alphabet(&self) -> u8 {
        2
    }

    /// Larger is better. Lenient: invalid constructions get a penalized score.
    fn score(&self, payload: &[u8]) -> Result<Score, ProblemError>;

    fn is_valid(&self, payload: &[u8]) -> bool;

    fn local_search(&self, start: &[u8], rng: &mut SearchRng) -> Vec<u8>;

    /// Local search from an ordered list of `(position, value)` items. Problems
    /// whose search depends on insertion order override this; the default
    /// materializes the payload (first occurrence of a position wins).
    fn local_search_ordered(&self, items: &[(usize, u8)], rng: &mut SearchRng) -> Vec<u8> {
        let mut payload = vec![0u8; self.payload_len()];
        let mut seen = vec![false; self.payload_len()];
        for &(pos, value) in items {
            if pos < payload.len() && !seen[pos] {
                seen[pos] = true;
                payload[pos] = value;
            }
        }
        self.local_search(&payload, rng)
    }

    /// The trivial starting point of the seed phase.
    fn empty(&self) -> Vec<u8> {
        vec![0; self.payload_len()]
    }

    /// Images of `payload` under the problem's symmetry group, used for data
    /// augmentation. Defaults to the identity only.
    fn symmetries(&self, payload: &[u8]) -> Vec<Vec<u8>> {
        vec![payload.to_vec()]
    }

    /// Row lengths used by delimiter flattening, when the payload has rows.
    fn rows(&self) -> Option<Vec<usize>> {
        None
    }

    fn check_payload(&self, payload: &[u8]) -> Result<(), ProblemError> {
        if payload.len() != self.payload_len() {
            return Err(ProblemError::Shape {
                expected: self.payload_len(),
                got: payload.len(),
            });
        }
        let alphabet = self.alphabet();
        if let Some((position, &value)) = payload.iter().enumerate().find(|(_, &v)| v >= alphabet) {
            return Err(ProblemError::Value {
                position,
                value,
                alphabet,
            });
        }
        Ok(())
    }
}

/// Size parameters selecting a concrete problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    /// Vertices, matrix side, cube dimension, grid side or ground-set size.
    pub size: usize,
    /// Chain bound for Sperner families, number of families for cross-Sperner.
    pub k: usize,
    pub over_cover_weight: Score,
    pub under_cover_weight: Score,
}

impl ProblemSpec {
    pub fn new(id: ProblemId, size: usize) -> Self {
        let k = match id {
            ProblemId::SaturatedSperner => 2,
            ProblemId::CrossSperner => 2,
            _ => 0,
        };
        Self {
            id,
            size,
            k,
            over_cover_weight: boxes::DEFAULT_OVER_WEIGHT,
            under_cover_weight: boxes::DEFAULT_UNDER_WEIGHT,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn build(&self) -> Result<Box<dyn Problem>, ProblemError> {
        Ok(match self.id {
            ProblemId::Triangle => Box::new(TriangleFree::new(self.size)?),
            ProblemId::C4 => Box::new(C4Free::new(self.size)?),
            ProblemId::Permanent312 => Box::new(Permanent312::new(self.size)?),
            ProblemId::Hypercube => Box::new(HypercubeDiameter::new(self.size)?),
            ProblemId::Isosceles => Box::new(IsoscelesFree::new(self.size)?),
            ProblemId::Sphere => Box::new(NoFiveOnSphere::new(self.size)?),
            ProblemId::SaturatedSperner => Box::new(SaturatedSperner::new(self.size, self.k)?),
            ProblemId::CrossSperner => Box::new(CrossSperner::new(self.size, self.k)?),
            ProblemId::BoxCover => Box::new(BoxCoverProblem::with_weights(
                self.size,
                self.over_cover_weight,
                self.under_cover_weight,
            )?),
        })
    }
}

/// Returns indices of the maxima of `values` (all ties).
pub(crate) fn argmax_all<T: Ord + Copy>(values: impl IntoIterator<Item = (usize, T)>) -> (Option<T>, Vec<usize>) {
    let mut best: Option<T> = None;
    let mut idx = Vec::new();
    for (i, v) in values {
        match best {
            Some(b) if v < b => {}
            Some(b) if v == b => idx.push(i),
            _ => {
                best = Some(v);
                idx.clear();
                idx.push(i);
            }
        }
    }
    (best, idx)
}
