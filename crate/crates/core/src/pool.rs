//! The training database: a deduplicated, score-ordered top-K collection.
//!
//! Entries are ordered by score descending, then by payload ascending. When the
//! pool is full a new entry is admitted only if its score strictly exceeds the
//! current minimum; the evicted entry is the last one in that order.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::construction::{payload_digits, Construction, ProblemId, Score, ScoredConstruction};

const HEADER_TAG: &str = "patternboost-pool";
const HEADER_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("payload length {got} does not match the pool's {expected} for {problem}")]
    Shape {
        problem: ProblemId,
        expected: usize,
        got: usize,
    },
    #[error("construction for {got} cannot enter a pool for {expected}")]
    WrongProblem { expected: ProblemId, got: ProblemId },
    #[error("payload value {0} cannot be written as a single digit")]
    Digit(u8),
    #[error("pool capacity must be positive")]
    ZeroCapacity,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    score: Score,
    payload: Vec<u8>,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then_with(|| self.payload.cmp(&other.payload))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct Pool {
    problem: ProblemId,
    payload_len: usize,
    capacity: usize,
    entries: BTreeSet<Entry>,
    payloads: HashSet<Vec<u8>>,
}

/// Two pools are equal when they hold the same entries for the same problem
/// shape; capacity is a runtime setting and is not part of the file format.
impl PartialEq for Pool {
    fn eq(&self, other: &Self) -> bool {
        self.problem == other.problem && self.payload_len == other.payload_len && self.entries == other.entries
    }
}

impl Eq for Pool {}

impl Pool {
    pub fn new(problem: ProblemId, payload_len: usize, capacity: usize) -> Result<Self, PoolError> {
        if capacity == 0 {
            return Err(PoolError::ZeroCapacity);
        }
        Ok(Self {
            problem,
            payload_len,
            capacity,
            entries: BTreeSet::new(),
            payloads: HashSet::new(),
        })
    }

    pub fn problem(&self) -> ProblemId {
        self.problem
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts `c`, returning whether the pool changed.
    ///
    /// Duplicates are ignored. A full pool only admits a construction whose
    /// score is strictly greater than its current minimum.
    pub fn insert(&mut self, c: ScoredConstruction) -> Result<bool, PoolError> {
        if c.construction.problem != self.problem {
            return Err(PoolError::WrongProblem {
                expected: self.problem,
                got: c.construction.problem,
            });
        }
        if c.construction.payload.len() != self.payload_len {
            return Err(PoolError::Shape {
                problem: self.problem,
                expected: self.payload_len,
                got: c.construction.payload.len(),
            });
        }
        if let Some(&v) = c.construction.payload.iter().find(|&&v| v > 9) {
            return Err(PoolError::Digit(v));
        }
        let entry = Entry {
            score: c.score,
            payload: c.construction.payload,
        };
        if self.payloads.contains(&entry.payload) {
            return Ok(false);
        }
        if self.entries.len() >= self.capacity {
            let min = self.entries.last().map(|e| e.score).unwrap_or(Score::MIN);
            if entry.score <= min {
                return Ok(false);
            }
            self.evict_last();
        }
        self.payloads.insert(entry.payload.clone());
        self.entries.insert(entry);
        Ok(true)
    }

    /// Changes the capacity, evicting the lowest entries if it shrinks.
    pub fn set_capacity(&mut self, capacity: usize) -> Result<(), PoolError> {
        if capacity == 0 {
            return Err(PoolError::ZeroCapacity);
        }
        self.capacity = capacity;
        while self.entries.len() > capacity {
            self.evict_last();
        }
        Ok(())
    }

    fn evict_last(&mut self) {
        if let Some(e) = self.entries.pop_last() {
            self.payloads.remove(&e.payload);
        }
    }

    pub fn contains_payload(&self, payload: &[u8]) -> bool {
        self.payloads.contains(payload)
    }

    pub fn best_score(&self) -> Option<Score> {
        self.entries.first().map(|e| e.score)
    }

    pub fn min_score(&self) -> Option<Score> {
        self.entries.last().map(|e| e.score)
    }

    pub fn mean_score(&self) -> Option<f64> {
        if self.entries.is_empty() {
            return None;
        }
        let sum: f64 = self.entries.iter().map(|e| e.score as f64).sum();
        Some(sum / self.entries.len() as f64)
    }

    /// Entries in pool order (best first).
    pub fn iter(&self) -> impl Iterator<Item = (Score, &[u8])> + '_ {
        self.entries.iter().map(|e| (e.score, e.payload.as_slice()))
    }

    pub fn to_constructions(&self) -> Vec<ScoredConstruction> {
        self.entries
            .iter()
            .map(|e| ScoredConstruction::new(Construction::new(self.problem, e.payload.clone()), e.score))
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), PoolError> {
        writeln!(w, "{HEADER_TAG} {HEADER_VERSION} {} {}", self.problem, self.payload_len)?;
        for e in &self.entries {
            writeln!(w, "{}\t{}", e.score, payload_digits(&e.payload))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PoolError> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file))
    }

    /// Reads a pool; the capacity becomes `capacity` or, if absent, the entry count.
    pub fn read_from<R: BufRead>(r: R, capacity: Option<usize>) -> Result<Self, PoolError> {
        let mut lines = r.lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => {
                return Err(PoolError::Parse {
                    line: 1,
                    message: "missing header".into(),
                })
            }
        };
        let (problem, payload_len) = parse_header(&header)?;
        let mut entries = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let lineno = idx + 2;
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| PoolError::Parse { line: lineno, message };
            let (score, digits) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected `<score>\\t<payload>`".into()))?;
            let score: Score = score
                .parse()
                .map_err(|e| parse_err(format!("bad score `{score}`: {e}")))?;
            let payload = digits
                .bytes()
                .map(|b| match b {
                    b'0'..=b'9' => Ok(b - b'0'),
                    _ => Err(parse_err(format!("non-digit byte {:?} in payload", char::from(b)))),
                })
                .collect::<Result<Vec<u8>, _>>()?;
            if payload.len() != payload_len {
                return Err(parse_err(format!(
                    "payload length {} does not match header length {payload_len}",
                    payload.len()
                )));
            }
            entries.push(ScoredConstruction::new(Construction::new(problem, payload), score));
        }
        let capacity = capacity.unwrap_or(entries.len()).max(1);
        let mut pool = Pool::new(problem, payload_len, capacity)?;
        for e in entries {
            pool.insert(e)?;
        }
        Ok(pool)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PoolError> {
        Self::read_from(BufReader::new(File::open(path)?), None)
    }

    pub fn load_with_capacity(path: impl AsRef<Path>, capacity: usize) -> Result<Self, PoolError> {
        Self::read_from(BufReader::new(File::open(path)?), Some(capacity))
    }
}

fn parse_header(header: &str) -> Result<(ProblemId, usize), PoolError> {
    let err = |message: String| PoolError::Parse { line: 1, message };
    let fields: Vec<&str> = header.split_whitespace().collect();
    match fields.as_slice() {
        [HEADER_TAG, HEADER_VERSION, problem, len] => {
            let problem = problem.parse::<ProblemId>().map_err(|e| err(e.to_string()))?;
            let len = len
                .parse::<usize>()
                .map_err(|e| err(format!("bad payload length `{len}`: {e}")))?;
            Ok((problem, len))
        }
        _ => Err(err(format!("unrecognized header `{header}`"))),
    }
}
