//! Referential injection: a thought's K/V is appended to the main agent's
//! cache at reserved virtual positions, between two forward steps, without
//! adding any visible token.

use std::sync::{mpsc, Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};
use crate::model::{forward_step, KvCache, ModelConfig, Origin, StepOutput, TokenId, WeightStore};
use crate::prism::AgentHandle;

/// Allocator over the reserved top range `[reserved_start, max_positions)`.
///
/// The b-th injection gets `reserved_start + (tokens injected before it)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VirtualPositions {
    reserved_start: usize,
    limit: usize,
    injected: usize,
}

impl VirtualPositions {
    /// Reserves the top quarter of the position range.
    pub fn new(config: &ModelConfig) -> Self {
        let reserved = config.max_positions / 4;
        Self { reserved_start: config.max_positions - reserved, limit: config.max_positions, injected: 0 }
    }

    pub fn with_reserved(config: &ModelConfig, reserved: usize) -> Result<Self> {
        if reserved == 0 || reserved >= config.max_positions {
            return Err(CortexError::Config(format!(
                "reserved range {reserved} must lie strictly inside max_positions {}",
                config.max_positions
            )));
        }
        Ok(Self { reserved_start: config.max_positions - reserved, limit: config.max_positions, injected: 0 })
    }

    pub fn reserved_start(&self) -> usize {
        self.reserved_start
    }

    /// Next base that `allocate` would hand out.
    pub fn peek(&self) -> usize {
        self.reserved_start + self.injected
    }

    pub fn allocate(&mut self, len: usize) -> Result<usize> {
        let base = self.peek();
        if base + len > self.limit {
            return Err(CortexError::Capacity { position: base + len - 1, limit: self.limit });
        }
        self.injected += len;
        Ok(base)
    }
}

/// K/V of a thought encoded in isolation at consecutive virtual positions.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedThought {
    pub block: KvCache,
    pub base: usize,
    /// Final-layer hidden state of the thought's last token.
    pub hidden: Vec<f32>,
}

/// Forward pass over `tokens` at `base, base + 1, ...`, attending only
/// within the thought.
pub fn encode_thought(weights: &WeightStore, tokens: &[TokenId], base: usize) -> Result<EncodedThought> {
    if tokens.is_empty() {
        return Err(CortexError::Precondition("cannot encode an empty thought".into()));
    }
    let max = weights.config().max_positions;
    if base + tokens.len() > max {
        return Err(CortexError::Capacity { position: base + tokens.len() - 1, limit: max });
    }
    let mut block = KvCache::new(weights.config());
    let mut hidden = Vec::new();
    for (i, &t) in tokens.iter().enumerate() {
        hidden = forward_step(weights, &mut block, t, base + i)?.hidden;
    }
    Ok(EncodedThought { block, base, hidden })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionRecord {
    pub thought_id: u64,
    pub token_count: usize,
    pub virtual_position_base: usize,
    /// River position that the next visible token will take.
    pub applied_at_stream_position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Boundary,
    InFlight(TokenId),
}

/// The main agent's cache plus its visible token stream.
///
/// A step is split into `begin_step` / `finish_step`; injections are only
/// legal in between steps. The cache may be shared with a registry handle
/// for accounting; the river is its only writer.
#[derive(Debug)]
pub struct River {
    cache: Arc<Mutex<KvCache>>,
    next_position: usize,
    visible: Vec<TokenId>,
    phase: Phase,
    positions: VirtualPositions,
    last: Option<StepOutput>,
}

impl River {
    pub fn new(config: &ModelConfig) -> Self {
        Self::with_positions(config, VirtualPositions::new(config))
    }

    pub fn with_positions(config: &ModelConfig, positions: VirtualPositions) -> Self {
        Self::from_shared(Arc::new(Mutex::new(KvCache::new(config))), positions)
    }

    /// Drives the cache owned by a registered river agent.
    pub fn for_agent(handle: &AgentHandle, positions: VirtualPositions) -> Self {
        Self::from_shared(handle.shared_cache(), positions)
    }

    fn from_shared(cache: Arc<Mutex<KvCache>>, positions: VirtualPositions) -> Self {
        Self {
            cache,
            next_position: 0,
            visible: Vec::new(),
            phase: Phase::Boundary,
            positions,
            last: None,
        }
    }

    pub fn cache(&self) -> MutexGuard<'_, KvCache> {
        self.cache.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn visible(&self) -> &[TokenId] {
        &self.visible
    }

    pub fn next_position(&self) -> usize {
        self.next_position
    }

    pub fn last_output(&self) -> Option<&StepOutput> {
        self.last.as_ref()
    }

    pub fn virtual_positions(&self) -> &VirtualPositions {
        &self.positions
    }

    pub fn at_boundary(&self) -> bool {
        self.phase == Phase::Boundary
    }

    pub fn begin_step(&mut self, token: TokenId) -> Result<()> {
        if !self.at_boundary() {
            return Err(CortexError::Sequencing("a step is already in flight".into()));
        }
        if self.next_position >= self.positions.reserved_start() {
            return Err(CortexError::Capacity {
                position: self.next_position,
                limit: self.positions.reserved_start(),
            });
        }
        self.phase = Phase::InFlight(token);
        Ok(())
    }

    pub fn finish_step(&mut self, weights: &WeightStore) -> Result<StepOutput> {
        let Phase::InFlight(token) = self.phase else {
            return Err(CortexError::Sequencing("no step in flight".into()));
        };
        self.phase = Phase::Boundary;
        let out = forward_step(weights, &mut self.cache(), token, self.next_position)?;
        self.next_position += 1;
        self.visible.push(token);
        self.last = Some(out.clone());
        Ok(out)
    }

    pub fn step(&mut self, weights: &WeightStore, token: TokenId) -> Result<StepOutput> {
        self.begin_step(token)?;
        self.finish_step(weights)
    }

    /// Allocates a virtual base, encodes `tokens` there and injects the block.
    pub fn inject_thought(
        &mut self,
        weights: &WeightStore,
        tokens: &[TokenId],
        thought_id: u64,
    ) -> Result<InjectionRecord> {
        if !self.at_boundary() {
            return Err(CortexError::Sequencing("injection attempted mid-step".into()));
        }
        let mut positions = self.positions.clone();
        let base = positions.allocate(tokens.len())?;
        let encoded = encode_thought(weights, tokens, base)?;
        let record = self.inject(&encoded, thought_id)?;
        self.positions = positions;
        Ok(record)
    }

    /// Appends a pre-encoded block as injected entries.
    pub fn inject(&mut self, thought: &EncodedThought, thought_id: u64) -> Result<InjectionRecord> {
        if !self.at_boundary() {
            return Err(CortexError::Sequencing("injection attempted mid-step".into()));
        }
        if thought.block.is_empty() {
            return Err(CortexError::Precondition("injected block is empty".into()));
        }
        self.cache().extend_from(&thought.block, Origin::Injected)?;
        Ok(InjectionRecord {
            thought_id,
            token_count: thought.block.len(),
            virtual_position_base: thought.base,
            applied_at_stream_position: self.next_position,
        })
    }
}

/// Many-producer, single-consumer FIFO drained at token boundaries.
pub fn boundary_queue<T>() -> (BoundarySender<T>, BoundaryReceiver<T>) {
    let (tx, rx) = mpsc::channel();
    (BoundarySender(tx), BoundaryReceiver(rx))
}

#[derive(Debug)]
pub struct BoundarySender<T>(mpsc::Sender<T>);

impl<T> Clone for BoundarySender<T> {
    fn clone(&self) -> Self {
        Self(self.0.clone())
    }
}

impl<T> BoundarySender<T> {
    /// Returns false once the receiving lane has gone away.
    pub fn send(&self, item: T) -> bool {
        self.0.send(item).is_ok()
    }
}

#[derive(Debug)]
pub struct BoundaryReceiver<T>(mpsc::Receiver<T>);

impl<T> BoundaryReceiver<T> {
    /// Everything queued so far, without blocking.
    pub fn drain(&self) -> Vec<T> {
        self.0.try_iter().collect()
    }

    /// Blocks for the next item; `None` when every sender is gone.
    pub fn recv(&self) -> Option<T> {
        self.0.recv().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_weights;

    #[test]
    fn virtual_bases_accumulate_from_reserved_start() {
        let cfg = ModelConfig::default();
        let mut vp = VirtualPositions::new(&cfg);
        assert_eq!(vp.reserved_start(), 6144);
        assert_eq!(vp.allocate(3).unwrap(), 6144);
        assert_eq!(vp.allocate(5).unwrap(), 6147);
        assert_eq!(vp.peek(), 6152);
        assert!(vp.allocate(10_000).is_err());
    }

    #[test]
    fn one_token_thought_has_one_entry_per_layer() {
        let w = init_weights(&ModelConfig::default()).unwrap();
        let t = encode_thought(&w, &[7], 6144).unwrap();
        assert_eq!(t.block.len(), 1);
        assert!(t.block.is_consistent());
        assert_eq!(t, encode_thought(&w, &[7], 6144).unwrap());
        assert!(encode_thought(&w, &[], 6144).is_err());
        assert!(matches!(encode_thought(&w, &[1, 2], 8191), Err(CortexError::Capacity { .. })));
    }

    #[test]
    fn injection_mid_step_is_a_sequencing_error() {
        let w = init_weights(&ModelConfig::default()).unwrap();
        let mut river = River::new(w.config());
        river.step(&w, 1).unwrap();
        river.begin_step(2).unwrap();
        let thought = encode_thought(&w, &[3], 6144).unwrap();
        assert!(matches!(river.inject(&thought, 0), Err(CortexError::Sequencing(_))));
        assert!(matches!(river.inject_thought(&w, &[3], 0), Err(CortexError::Sequencing(_))));
        river.finish_step(&w).unwrap();
        let rec = river.inject(&thought, 0).unwrap();
        assert_eq!(rec.applied_at_stream_position, 2);
        assert_eq!(river.visible(), &[1, 2]);
        assert_eq!(river.cache().origin(2), Origin::Injected);
    }

    #[test]
    fn river_cannot_enter_reserved_range() {
        let cfg = ModelConfig { max_positions: 8, ..ModelConfig::default() };
        let w = init_weights(&cfg).unwrap();
        let mut river = River::new(&cfg);
        for t in 0..6 {
            river.step(&w, t).unwrap();
        }
        assert!(matches!(river.step(&w, 0), Err(CortexError::Capacity { .. })));
        assert!(river.at_boundary());
    }

    #[test]
    fn boundary_queue_is_fifo_per_producer() {
        let (tx, rx) = boundary_queue();
        let tx2 = tx.clone();
        std::thread::spawn(move || {
            for i in 0..100 {
                tx2.send(i);
            }
        })
        .join()
        .unwrap();
        for i in 100..110 {
            tx.send(i);
        }
        assert_eq!(rx.drain(), (0..110).collect::<Vec<_>>());
        assert!(rx.drain().is_empty());
    }
}
