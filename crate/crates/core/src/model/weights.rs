use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ModelConfig, ELEMENT_BYTES};
use crate::error::Result;

/// Parameters of one decoder block. Matrices are row-major `[in, out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    pub(crate) attn_norm: Vec<f32>,
    pub(crate) wq: Vec<f32>,
    pub(crate) wk: Vec<f32>,
    pub(crate) wv: Vec<f32>,
    pub(crate) wo: Vec<f32>,
    pub(crate) mlp_norm: Vec<f32>,
    pub(crate) w_up: Vec<f32>,
    pub(crate) w_down: Vec<f32>,
}

impl LayerWeights {
    pub fn attn_norm(&self) -> &[f32] {
        &self.attn_norm
    }
    pub fn wq(&self) -> &[f32] {
        &self.wq
    }
    pub fn wk(&self) -> &[f32] {
        &self.wk
    }
    pub fn wv(&self) -> &[f32] {
        &self.wv
    }
    pub fn wo(&self) -> &[f32] {
        &self.wo
    }
    pub fn mlp_norm(&self) -> &[f32] {
        &self.mlp_norm
    }
    pub fn w_up(&self) -> &[f32] {
        &self.w_up
    }
    pub fn w_down(&self) -> &[f32] {
        &self.w_down
    }

    fn param_count(&self) -> usize {
        self.attn_norm.len()
            + self.wq.len()
            + self.wk.len()
            + self.wv.len()
            + self.wo.len()
            + self.mlp_norm.len()
            + self.w_up.len()
            + self.w_down.len()
    }
}

/// The single immutable copy of all transformer parameters.
///
/// There is no mutating API: once built, a store is only ever read, and is
/// shared between agents behind an `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStore {
    config: ModelConfig,
    embedding: Vec<f32>,
    layers: Vec<LayerWeights>,
    final_norm: Vec<f32>,
    unembedding: Vec<f32>,
    total_bytes: usize,
}

/// Builds a deterministic store from `config.seed`.
///
/// Scheme, drawn in this exact order from a ChaCha8 stream:
/// embedding ~ N(0, 1); per layer wq, wk, wv, wo, w_up ~ N(0, 1/d_model),
/// w_down ~ N(0, 1/d_ff); unembedding ~ N(0, 1/d_model). All norm gains are 1.
pub fn init_weights(config: &ModelConfig) -> Result<WeightStore> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let d = config.d_model;
    let d_ff = config.d_ff();

    let mut gaussian = |len: usize, std: f64| -> Vec<f32> {
        let normal = Normal::new(0.0, std).expect("std is positive and finite");
        (0..len).map(|_| normal.sample(&mut rng) as f32).collect()
    };

    let proj_std = 1.0 / (d as f64).sqrt();
    let down_std = 1.0 / (d_ff as f64).sqrt();

    let embedding = gaussian(config.vocab_size * d, 1.0);
    let layers = (0..config.n_layers)
        .map(|_| LayerWeights {
            attn_norm: vec![1.0; d],
            wq: gaussian(d * d, proj_std),
            wk: gaussian(d * d, proj_std),
            wv: gaussian(d * d, proj_std),
            wo: gaussian(d * d, proj_std),
            mlp_norm: vec![1.0; d],
            w_up: gaussian(d * d_ff, proj_std),
            w_down: gaussian(d_ff * d, down_std),
        })
        .collect::<Vec<_>>();
    let final_norm = vec![1.0; d];
    let unembedding = gaussian(d * config.vocab_size, proj_std);

    let params = embedding.len()
        + layers.iter().map(LayerWeights::param_count).sum::<usize>()
        + final_norm.len()
        + unembedding.len();

    Ok(WeightStore {
        config: *config,
        embedding,
        layers,
        final_norm,
        unembedding,
        total_bytes: params * ELEMENT_BYTES,
    })
}

impl WeightStore {
    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn total_bytes(&self) -> usize {
        self.total_bytes
    }

    pub fn embedding_row(&self, token: usize) -> &[f32] {
        let d = self.config.d_model;
        &self.embedding[token * d..(token + 1) * d]
    }

    pub fn layers(&self) -> &[LayerWeights] {
        &self.layers
    }

    pub fn final_norm(&self) -> &[f32] {
        &self.final_norm
    }

    /// Row-major `[d_model, vocab_size]`.
    pub fn unembedding(&self) -> &[f32] {
        &self.unembedding
    }
}
