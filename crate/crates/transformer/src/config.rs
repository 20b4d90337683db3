use crate::TransformerError;

/// Shape of a model. `max_len` counts input positions: a training sequence
/// `[start, t_1, .., t_l, end]` needs `max_len >= l + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub n_layers: usize,
    pub dim: usize,
    pub n_heads: usize,
    pub vocab_size: usize,
    pub max_len: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), TransformerError> {
        let bad = |m: String| Err(TransformerError::Config(m));
        if self.n_layers == 0 {
            return bad("n_layers must be positive".into());
        }
        if self.n_heads == 0 || self.dim == 0 {
            return bad("dim and n_heads must be positive".into());
        }
        if !self.dim.is_multiple_of(self.n_heads) {
            return bad(format!("dim {} is not divisible by n_heads {}", self.dim, self.n_heads));
        }
        if self.vocab_size < 2 {
            return bad("vocab_size must be at least 2".into());
        }
        if self.max_len == 0 {
            return bad("max_len must be positive".into());
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.n_heads
    }
}
