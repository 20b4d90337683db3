//! Reversible encodings between payloads and token sequences.

use thiserror::Error;

pub mod bpe;
pub mod codec;
pub mod fixed;
pub mod flatten;
pub mod points;

pub use bpe::Vocab;
pub use codec::Codec;
pub use fixed::FixedWidth;
pub use flatten::{flatten_graph, flatten_rows, unflatten_graph, unflatten_rows};
pub use points::{point_decode, point_encode};

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,
    #[error("vocabulary size {requested} is below the {base} base symbols")]
    VocabTooSmall { requested: usize, base: usize },
    #[error("symbol {0:?} is not in the base alphabet")]
    UnknownSymbol(char),
    #[error("token id {0} is not in the vocabulary")]
    UnknownToken(u32),
    #[error("decoded length {got}, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("bad row structure: {0}")]
    RowStructure(String),
    #[error("coordinate {value} outside 0..{n}")]
    Coordinate { value: i64, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
