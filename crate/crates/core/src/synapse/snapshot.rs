use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{KvCache, Origin, ModelConfig};

/// One retained context token: its K/V for every layer, copied at selection.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkEntry {
    /// Rotary position of the token in the source cache.
    pub source_position: usize,
    /// Index of the entry in the source cache at capture time.
    pub cache_index: usize,
    /// `n_layers` consecutive `d_model`-wide key rows.
    pub keys: Vec<f32>,
    pub values: Vec<f32>,
    pub hybrid_score: f64,
}

/// Immutable, versioned set of at most `k_configured` landmarks sorted by
/// source position.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseSnapshot {
    pub landmarks: Vec<LandmarkEntry>,
    /// Assigned on push; strictly increasing per synapse, starting at 1.
    pub version: u64,
    /// Number of context entries in the source cache at capture.
    pub source_length: usize,
    /// First position after the source's last context token.
    pub next_position: usize,
    pub k_configured: usize,
}

/// Debug dump of a snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDump {
    pub version: u64,
    pub source_length: usize,
    pub positions: Vec<usize>,
    pub hybrid_scores: Vec<f64>,
}

impl SynapseSnapshot {
    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn positions(&self) -> Vec<usize> {
        self.landmarks.iter().map(|l| l.source_position).collect()
    }

    /// Fraction of source tokens retained.
    pub fn retention(&self) -> f64 {
        if self.source_length == 0 {
            0.0
        } else {
            self.len() as f64 / self.source_length as f64
        }
    }

    /// Analytic K/V bytes held by the landmarks.
    pub fn byte_size(&self, config: &ModelConfig) -> usize {
        self.len() * config.kv_entry_bytes()
    }

    /// A fresh cache holding the landmark K/V at their source positions.
    pub fn to_cache(&self, config: &ModelConfig) -> Result<KvCache> {
        let mut cache = KvCache::new(config);
        for l in &self.landmarks {
            cache.append(l.source_position, Origin::Context, &l.keys, &l.values)?;
        }
        Ok(cache)
    }

    pub fn dump(&self) -> SnapshotDump {
        SnapshotDump {
            version: self.version,
            source_length: self.source_length,
            positions: self.positions(),
            hybrid_scores: self.landmarks.iter().map(|l| l.hybrid_score).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.dump())?)
    }
}
