//! One shared weight store, a registry of agents and their caches, and the
//! analytic memory accountant.
//!
//! `total = weight_bytes + sum(per-agent K/V bytes)`. Weights are counted
//! once however many agents are registered. A stream agent's cache is seeded
//! from a landmark snapshot, so its charge is `k` entries plus whatever it
//! generates itself.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};
use crate::model::{KvCache, WeightStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    River,
    Stream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    Medium,
    High,
}

impl Role {
    pub fn priority(self) -> Priority {
        match self {
            Role::River => Priority::High,
            Role::Stream => Priority::Medium,
        }
    }
}

pub type AgentId = u64;

/// An agent's identity and its private cache. Cloning a handle shares the
/// same cache; one lane owns it at a time.
#[derive(Debug, Clone)]
pub struct AgentHandle {
    pub id: AgentId,
    pub role: Role,
    pub priority: Priority,
    cache: Arc<Mutex<KvCache>>,
}

impl AgentHandle {
    pub fn cache(&self) -> MutexGuard<'_, KvCache> {
        self.cache.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub(crate) fn shared_cache(&self) -> Arc<Mutex<KvCache>> {
        self.cache.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryReport {
    pub weight_bytes: usize,
    /// `(agent id, K/V bytes)` for every registered agent, by id.
    pub per_agent_bytes: Vec<(AgentId, usize)>,
    pub total_bytes: usize,
    pub agent_count: usize,
}

impl MemoryReport {
    pub fn agent_bytes(&self) -> usize {
        self.per_agent_bytes.iter().map(|(_, b)| b).sum()
    }
}

#[derive(Debug, Default)]
struct Registry {
    next_id: AgentId,
    river: Option<AgentId>,
    agents: BTreeMap<AgentId, AgentHandle>,
}

#[derive(Debug)]
pub struct Prism {
    weights: Arc<WeightStore>,
    registry: Mutex<Registry>,
}

impl Prism {
    pub fn new(weights: WeightStore) -> Self {
        Self::from_shared(Arc::new(weights))
    }

    pub fn from_shared(weights: Arc<WeightStore>) -> Self {
        Self { weights, registry: Mutex::new(Registry::default()) }
    }

    pub fn weights(&self) -> &Arc<WeightStore> {
        &self.weights
    }

    fn registry(&self) -> MutexGuard<'_, Registry> {
        self.registry.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Registers an agent with a fresh, empty cache.
    pub fn register_agent(&self, role: Role) -> Result<AgentHandle> {
        self.register_with_cache(role, KvCache::new(self.weights.config()))
    }

    pub fn register_with_cache(&self, role: Role, cache: KvCache) -> Result<AgentHandle> {
        let cfg = self.weights.config();
        if cache.n_layers() != cfg.n_layers || cache.d_model() != cfg.d_model {
            return Err(CortexError::Precondition("cache shape does not match the shared weights".into()));
        }
        let mut reg = self.registry();
        if role == Role::River && reg.river.is_some() {
            return Err(CortexError::Topology("a river agent is already registered".into()));
        }
        let id = reg.next_id;
        reg.next_id += 1;
        let handle = AgentHandle { id, role, priority: role.priority(), cache: Arc::new(Mutex::new(cache)) };
        if role == Role::River {
            reg.river = Some(id);
        }
        reg.agents.insert(id, handle.clone());
        Ok(handle)
    }

    /// Removes an agent. Ids are never handed out again.
    pub fn retire(&self, id: AgentId) -> Option<AgentHandle> {
        let mut reg = self.registry();
        if reg.river == Some(id) {
            reg.river = None;
        }
        reg.agents.remove(&id)
    }

    pub fn get(&self, id: AgentId) -> Option<AgentHandle> {
        self.registry().agents.get(&id).cloned()
    }

    pub fn live_streams(&self) -> usize {
        self.registry().agents.values().filter(|a| a.role == Role::Stream).count()
    }

    pub fn memory_report(&self) -> MemoryReport {
        let handles: Vec<AgentHandle> = self.registry().agents.values().cloned().collect();
        let per_agent_bytes: Vec<(AgentId, usize)> = handles.iter().map(|h| (h.id, h.cache().byte_size())).collect();
        let weight_bytes = self.weights.total_bytes();
        MemoryReport {
            weight_bytes,
            total_bytes: weight_bytes + per_agent_bytes.iter().map(|(_, b)| b).sum::<usize>(),
            agent_count: per_agent_bytes.len(),
            per_agent_bytes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_weights, ModelConfig, Origin};

    fn prism() -> Prism {
        Prism::new(init_weights(&ModelConfig::default()).unwrap())
    }

    #[test]
    fn first_river_gets_id_zero_and_high_priority() {
        let p = prism();
        let r = p.register_agent(Role::River).unwrap();
        assert_eq!((r.id, r.priority), (0, Priority::High));
        assert_eq!(p.register_agent(Role::Stream).unwrap().priority, Priority::Medium);
    }

    #[test]
    fn second_river_is_a_topology_error() {
        let p = prism();
        let r = p.register_agent(Role::River).unwrap();
        assert!(matches!(p.register_agent(Role::River), Err(CortexError::Topology(_))));
        p.retire(r.id);
        assert_eq!(p.register_agent(Role::River).unwrap().id, 1);
    }

    #[test]
    fn weights_are_counted_once() {
        let p = prism();
        p.register_agent(Role::River).unwrap();
        let base = p.memory_report();
        assert_eq!(base.total_bytes, base.weight_bytes);
        for _ in 0..100 {
            p.register_agent(Role::Stream).unwrap();
        }
        let after = p.memory_report();
        assert_eq!(after.weight_bytes, base.weight_bytes);
        assert_eq!(after.agent_count, 101);
    }

    #[test]
    fn k_landmark_view_costs_closed_form_bytes() {
        let p = prism();
        let cfg = *p.weights().config();
        let mut cache = KvCache::new(&cfg);
        let row = vec![0.5f32; cfg.n_layers * cfg.d_model];
        for pos in 0..64 {
            cache.append(pos, Origin::Context, &row, &row).unwrap();
        }
        let h = p.register_with_cache(Role::Stream, cache).unwrap();
        // 64 entries x 4 layers x (K + V) x 64 floats x 4 bytes
        assert_eq!(p.memory_report().per_agent_bytes, vec![(h.id, 64 * 4 * 2 * 64 * 4)]);
        assert_eq!(64 * 4 * 2 * 64 * 4, 131_072);
    }

    #[test]
    fn concurrent_registration_gives_unique_ids() {
        let p = Arc::new(prism());
        let ids: Vec<AgentId> = std::thread::scope(|s| {
            let workers: Vec<_> = (0..4)
                .map(|_| {
                    let p = p.clone();
                    s.spawn(move || (0..50).map(|_| p.register_agent(Role::Stream).unwrap().id).collect::<Vec<_>>())
                })
                .collect();
            workers.into_iter().flat_map(|w| w.join().unwrap()).collect()
        });
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 200);
    }
}
