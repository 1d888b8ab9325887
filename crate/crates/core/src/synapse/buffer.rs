//! Single-writer, many-reader snapshot slot.
//!
//! The writer half is not `Clone`, so exactly one lane can publish. Readers
//! get an `Arc` to a complete snapshot: a push swaps the pointer under a
//! short write lock and never touches a published snapshot.

use std::sync::{Arc, RwLock};

use super::snapshot::SynapseSnapshot;
use crate::error::{CortexError, Result};

#[derive(Debug, Default)]
struct Slot {
    latest: RwLock<Option<Arc<SynapseSnapshot>>>,
}

#[derive(Debug)]
pub struct SynapseWriter {
    slot: Arc<Slot>,
    version: u64,
}

#[derive(Debug, Clone)]
pub struct SynapseReader {
    slot: Arc<Slot>,
}

pub fn synapse_channel() -> (SynapseWriter, SynapseReader) {
    let slot = Arc::new(Slot::default());
    (SynapseWriter { slot: slot.clone(), version: 0 }, SynapseReader { slot })
}

impl SynapseWriter {
    /// Stamps the next version on `snapshot` and publishes it.
    pub fn push(&mut self, mut snapshot: SynapseSnapshot) -> Arc<SynapseSnapshot> {
        self.version += 1;
        snapshot.version = self.version;
        let published = Arc::new(snapshot);
        *self.slot.latest.write().unwrap_or_else(|e| e.into_inner()) = Some(published.clone());
        published
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn reader(&self) -> SynapseReader {
        SynapseReader { slot: self.slot.clone() }
    }
}

impl SynapseReader {
    pub fn read_latest(&self) -> Result<Arc<SynapseSnapshot>> {
        self.slot
            .latest
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
            .ok_or(CortexError::EmptySynapse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synapse::LandmarkEntry;

    fn snapshot(tag: f64, n: usize) -> SynapseSnapshot {
        SynapseSnapshot {
            landmarks: (0..n)
                .map(|i| LandmarkEntry {
                    source_position: i,
                    cache_index: i,
                    keys: vec![tag as f32; 4],
                    values: vec![tag as f32; 4],
                    hybrid_score: tag,
                })
                .collect(),
            version: 0,
            source_length: n,
            next_position: n,
            k_configured: n,
        }
    }

    #[test]
    fn read_before_push_is_empty() {
        let (_w, r) = synapse_channel();
        assert!(matches!(r.read_latest(), Err(CortexError::EmptySynapse)));
    }

    #[test]
    fn latest_wins_and_versions_are_dense() {
        let (mut w, r) = synapse_channel();
        w.push(snapshot(1.0, 2));
        w.push(snapshot(2.0, 3));
        assert_eq!(r.read_latest().unwrap().version, 2);
        assert_eq!(r.read_latest().unwrap().len(), 3);
        for expected in 3..=1000 {
            assert_eq!(w.push(snapshot(0.0, 1)).version, expected);
        }
        assert_eq!(r.read_latest().unwrap().version, 1000);
    }

    #[test]
    fn concurrent_readers_never_see_a_mix() {
        let (mut w, r) = synapse_channel();
        w.push(snapshot(1.0, 16));
        std::thread::scope(|s| {
            for _ in 0..4 {
                let r = r.clone();
                s.spawn(move || {
                    let mut last = 0;
                    for _ in 0..2000 {
                        let snap = r.read_latest().unwrap();
                        assert!(snap.version >= last);
                        last = snap.version;
                        let tag = snap.landmarks[0].hybrid_score;
                        assert!(snap.landmarks.iter().all(|l| l.hybrid_score == tag && l.keys[0] == tag as f32));
                        assert_eq!(snap.len(), 16);
                    }
                });
            }
            for v in 2..500u32 {
                w.push(snapshot(v as f64, 16));
            }
        });
    }
}
