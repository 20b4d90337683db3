//! A small decoder-only transformer trained from scratch: pre-norm blocks of
//! causal multi-head attention and a GELU MLP, summed next-token
//! cross-entropy, manual backpropagation, AdamW, and cached autoregressive
//! sampling.

use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

mod checkpoint;
mod config;
mod layout;
mod model;
mod ops;
mod optim;
mod sample;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use config::ModelConfig;
pub use layout::{LayerOffsets, Layout};
pub use model::Model;
pub use optim::{train_step, AdamW, ACCUMULATION_WINDOW};
pub use sample::Sampled;

#[derive(Debug, Error)]
pub enum TransformerError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("sequence of {got} input positions exceeds max_len {max_len}")]
    TooLong { got: usize, max_len: usize },
    #[error("sequence needs at least two tokens, got {0}")]
    TooShort(usize),
    #[error("token id {token} is outside the vocabulary of {vocab}")]
    Token { token: u32, vocab: usize },
    #[error("non-finite loss {loss} at optimizer step {step}")]
    NonFinite { step: u64, loss: f64 },
    #[error("empty training batch")]
    EmptyBatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Floating-point element type of a model.
pub trait Real: Float + FromPrimitive + Sum + Default + Debug + Send + Sync + 'static {
    const NAME: &'static str;
    const BYTES: usize;
    fn put_le(self, out: &mut Vec<u8>);
    fn get_le(bytes: &[u8]) -> Self;

    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("every f64 converts to a float type")
    }
}

impl Real for f32 {
    const NAME: &'static str = "f32";
    const BYTES: usize = 4;

    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn get_le(bytes: &[u8]) -> Self {
        f32::from_le_bytes(bytes.try_into().expect("four bytes"))
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";
    const BYTES: usize = 8;

    fn put_le(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn get_le(bytes: &[u8]) -> Self {
        f64::from_le_bytes(bytes.try_into().expect("eight bytes"))
    }
}
