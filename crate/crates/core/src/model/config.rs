use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};

/// Width of every stored element (fp32 throughout).
pub const ELEMENT_BYTES: usize = std::mem::size_of::<f32>();

/// MLP hidden width as a multiple of `d_model`.
pub const MLP_RATIO: usize = 4;

/// Shape and seed of the decoder-only transformer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n_layers: usize,
    /// Attention heads per layer.
    pub n_heads: usize,
    pub d_model: usize,
    /// Per-head key width; must satisfy `d_model == n_heads * d_k`.
    pub d_k: usize,
    pub vocab_size: usize,
    /// Exclusive upper bound on any position written to a cache,
    /// virtual positions included.
    pub max_positions: usize,
    pub rope_base: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    /// The desk-scale toy: 4 layers, 4 heads, d_model 64, byte vocabulary.
    fn default() -> Self {
        Self {
            n_layers: 4,
            n_heads: 4,
            d_model: 64,
            d_k: 16,
            vocab_size: 256,
            max_positions: 8192,
            rope_base: 10_000.0,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CortexError::Config(msg));
        if self.n_layers == 0 || self.n_heads == 0 || self.d_k == 0 || self.vocab_size == 0 {
            return bad("n_layers, n_heads, d_k and vocab_size must all be positive".into());
        }
        if self.d_model != self.n_heads * self.d_k {
            return bad(format!(
                "d_model ({}) must equal n_heads ({}) x d_k ({})",
                self.d_model, self.n_heads, self.d_k
            ));
        }
        if self.d_k % 2 != 0 {
            return bad(format!("d_k ({}) must be even for rotary embeddings", self.d_k));
        }
        if self.max_positions == 0 {
            return bad("max_positions must be positive".into());
        }
        if !(self.rope_base.is_finite() && self.rope_base > 0.0) {
            return bad(format!("rope_base must be a positive real, got {}", self.rope_base));
        }
        Ok(())
    }

    pub fn d_ff(&self) -> usize {
        MLP_RATIO * self.d_model
    }

    /// Closed-form parameter count of the architecture built by `init_weights`.
    pub fn parameter_count(&self) -> usize {
        let d = self.d_model;
        let per_layer = 4 * d * d          // q, k, v, o projections
            + 2 * d                        // two RMSNorm gains
            + 2 * d * self.d_ff();         // MLP up + down
        self.vocab_size * d                // embedding
            + self.n_layers * per_layer
            + d                            // final norm gain
            + d * self.vocab_size          // unembedding
    }

    /// Bytes held by one cache entry across all layers (key + value).
    pub fn kv_entry_bytes(&self) -> usize {
        self.n_layers * 2 * self.d_model * ELEMENT_BYTES
    }
}
