//! Problem identifiers and the canonical construction payload.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Scores are signed so that minimization problems can be expressed by negation.
pub type Score = i64;

/// The nine problems the framework knows how to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    /// Maximize edges in a triangle-free graph.
    Triangle,
    /// Maximize edges in a graph without 4-cycles.
    C4,
    /// Maximize the permanent of a 312-avoiding binary matrix.
    Permanent312,
    /// Minimize edges of a spanning subgraph of the d-cube with diameter d.
    Hypercube,
    /// Maximize grid points with no isosceles triangle.
    Isosceles,
    /// Maximize points of the cubic grid with no five on a sphere or plane.
    Sphere,
    /// Minimize the size of a saturated k-Sperner family.
    SaturatedSperner,
    /// Maximize the product of family sizes of a cross-Sperner tuple.
    CrossSperner,
    /// Minimize the number of proper boxes double-covering {0,1,2}^d.
    BoxCover,
}

impl ProblemId {
    pub const ALL: [ProblemId; 9] = [
        ProblemId::Triangle,
        ProblemId::C4,
        ProblemId::Permanent312,
        ProblemId::Hypercube,
        ProblemId::Isosceles,
        ProblemId::Sphere,
        ProblemId::SaturatedSperner,
        ProblemId::CrossSperner,
        ProblemId::BoxCover,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Triangle => "triangle",
            ProblemId::C4 => "c4",
            ProblemId::Permanent312 => "permanent312",
            ProblemId::Hypercube => "hypercube",
            ProblemId::Isosceles => "isosceles",
            ProblemId::Sphere => "sphere",
            ProblemId::SaturatedSperner => "sperner",
            ProblemId::CrossSperner => "cross-sperner",
            ProblemId::BoxCover => "boxes",
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown problem id `{0}`")]
pub struct UnknownProblem(pub String);

impl FromStr for ProblemId {
    type Err = UnknownProblem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemId::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| UnknownProblem(s.to_string()))
    }
}

/// A candidate solution in canonical form: a fixed-length sequence of small
/// integers whose meaning is defined by the problem.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Construction {
    pub problem: ProblemId,
    pub payload: Vec<u8>,
}

impl Construction {
    pub fn new(problem: ProblemId, payload: Vec<u8>) -> Self {
        Self { problem, payload }
    }

    /// Payload rendered as contiguous decimal digits (every value must be < 10).
    pub fn digits(&self) -> String {
        payload_digits(&self.payload)
    }
}

pub fn payload_digits(payload: &[u8]) -> String {
    payload
        .iter()
        .map(|&v| {
            debug_assert!(v < 10);
            char::from(b'0' + v)
        })
        .collect()
}

/// A construction together with its cached score.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoredConstruction {
    pub construction: Construction,
    pub score: Score,
}

impl ScoredConstruction {
    pub fn new(construction: Construction, score: Score) -> Self {
        Self { construction, score }
    }

    pub fn payload(&self) -> &[u8] {
        &self.construction.payload
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_ids_round_trip_through_strings() {
        for id in ProblemId::ALL {
            assert_eq!(id.as_str().parse::<ProblemId>().unwrap(), id);
        }
        assert!("squares".parse::<ProblemId>().is_err());
    }

    #[test]
    fn identical_payloads_compare_equal() {
        let a = Construction::new(ProblemId::Triangle, vec![0, 1, 1]);
        let b = Construction::new(ProblemId::Triangle, vec![0, 1, 1]);
        assert_eq!(a, b);
        assert_eq!(a.digits(), "011");
    }
}
