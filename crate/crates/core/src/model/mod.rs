//! Deterministic seed-initialized decoder-only transformer with RoPE
//! attention and an append-only KV cache.

mod cache;
mod config;
mod forward;
pub mod math;
mod rope;
mod weights;

pub use cache::{KvCache, Origin};
pub use config::{ModelConfig, ELEMENT_BYTES, MLP_RATIO};
pub use forward::{forward_step, StepOutput, TokenId};
pub use math::{argmax, relative_error, softmax};
pub use rope::{apply_rope, rotate_heads, rotate_in_place};
pub use weights::{init_weights, LayerWeights, WeightStore};

/// Byte-level tokenizer: every byte is its own token.
pub fn tokenize(text: &[u8]) -> Vec<TokenId> {
    text.iter().map(|&b| b as TokenId).collect()
}

/// Inverse of [`tokenize`]. Token ids are assumed to be below 256.
pub fn detokenize(tokens: &[TokenId]) -> Vec<u8> {
    tokens.iter().map(|&t| t as u8).collect()
}
