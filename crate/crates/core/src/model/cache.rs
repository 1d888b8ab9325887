use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, ELEMENT_BYTES};
use crate::error::{CortexError, Result};

/// Where a cache entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Produced by a forward step of the owning agent (or copied from a landmark).
    Context,
    /// Appended by referential injection. Attendable, never a query.
    Injected,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct LayerKv {
    keys: Vec<f32>,
    values: Vec<f32>,
}

/// Append-only per-agent key/value cache.
///
/// Every layer holds the same number of entries; position and origin are
/// shared across layers. Keys are stored post-rotation with all heads
/// concatenated (`d_model` floats per entry per layer).
#[derive(Debug, Clone, PartialEq)]
pub struct KvCache {
    n_layers: usize,
    d_model: usize,
    layers: Vec<LayerKv>,
    positions: Vec<usize>,
    origins: Vec<Origin>,
}

impl KvCache {
    pub fn new(config: &ModelConfig) -> Self {
        Self::with_shape(config.n_layers, config.d_model)
    }

    pub fn with_shape(n_layers: usize, d_model: usize) -> Self {
        Self {
            n_layers,
            d_model,
            layers: vec![LayerKv::default(); n_layers],
            positions: Vec::new(),
            origins: Vec::new(),
        }
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn d_model(&self) -> usize {
        self.d_model
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn position(&self, index: usize) -> usize {
        self.positions[index]
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn origin(&self, index: usize) -> Origin {
        self.origins[index]
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn key(&self, layer: usize, index: usize) -> &[f32] {
        &self.layers[layer].keys[index * self.d_model..(index + 1) * self.d_model]
    }

    pub fn value(&self, layer: usize, index: usize) -> &[f32] {
        &self.layers[layer].values[index * self.d_model..(index + 1) * self.d_model]
    }

    /// Indices of `Origin::Context` entries, in cache order.
    pub fn context_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.origins[i] == Origin::Context).collect()
    }

    pub fn last_context_position(&self) -> Option<usize> {
        self.positions
            .iter()
            .zip(&self.origins)
            .rev()
            .find(|(_, o)| **o == Origin::Context)
            .map(|(p, _)| *p)
    }

    /// Analytic K/V footprint: entries x layers x 2 x d_model x 4 bytes.
    pub fn byte_size(&self) -> usize {
        self.len() * self.n_layers * 2 * self.d_model * ELEMENT_BYTES
    }

    /// Appends one complete entry. `keys` and `values` hold `n_layers`
    /// consecutive `d_model`-wide rows.
    pub fn append(&mut self, position: usize, origin: Origin, keys: &[f32], values: &[f32]) -> Result<()> {
        let width = self.n_layers * self.d_model;
        if keys.len() != width || values.len() != width {
            return Err(CortexError::Precondition(format!(
                "entry must carry {width} key and value floats, got {} and {}",
                keys.len(),
                values.len()
            )));
        }
        self.check_position(position, origin)?;
        self.positions.push(position);
        self.origins.push(origin);
        for (layer, (k, v)) in self
            .layers
            .iter_mut()
            .zip(keys.chunks_exact(self.d_model).zip(values.chunks_exact(self.d_model)))
        {
            layer.keys.extend_from_slice(k);
            layer.values.extend_from_slice(v);
        }
        Ok(())
    }

    /// Appends every entry of `block` with the given origin, preserving order.
    pub fn extend_from(&mut self, block: &KvCache, origin: Origin) -> Result<()> {
        if block.n_layers != self.n_layers || block.d_model != self.d_model {
            return Err(CortexError::Precondition("cache shapes differ".into()));
        }
        if origin == Origin::Context {
            let mut last = self.last_context_position();
            for &p in &block.positions {
                if last.is_some_and(|l| p <= l) {
                    return Err(CortexError::Precondition(format!(
                        "context position {p} does not follow {}",
                        last.unwrap_or_default()
                    )));
                }
                last = Some(p);
            }
        }
        self.positions.extend_from_slice(&block.positions);
        self.origins.extend(std::iter::repeat_n(origin, block.len()));
        for (dst, src) in self.layers.iter_mut().zip(&block.layers) {
            dst.keys.extend_from_slice(&src.keys);
            dst.values.extend_from_slice(&src.values);
        }
        Ok(())
    }

    pub(crate) fn check_position(&self, position: usize, origin: Origin) -> Result<()> {
        if origin == Origin::Context {
            if let Some(last) = self.last_context_position() {
                if position <= last {
                    return Err(CortexError::Precondition(format!(
                        "context position {position} must exceed previous context position {last}"
                    )));
                }
            }
        }
        Ok(())
    }

    // Forward-step plumbing: the position row is opened first, then each layer
    // receives its key/value as the pass reaches it.
    pub(crate) fn open_entry(&mut self, position: usize, origin: Origin) {
        self.positions.push(position);
        self.origins.push(origin);
    }

    pub(crate) fn push_layer(&mut self, layer: usize, key: &[f32], value: &[f32]) {
        self.layers[layer].keys.extend_from_slice(key);
        self.layers[layer].values.extend_from_slice(value);
    }

    pub(crate) fn layer_keys(&self, layer: usize) -> &[f32] {
        &self.layers[layer].keys
    }

    pub(crate) fn layer_values(&self, layer: usize) -> &[f32] {
        &self.layers[layer].values
    }

    /// True when every layer holds exactly `len()` entries.
    pub fn is_consistent(&self) -> bool {
        self.layers.iter().all(|l| {
            l.keys.len() == self.len() * self.d_model && l.values.len() == self.len() * self.d_model
        }) && self.origins.len() == self.positions.len()
    }
}
