use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};
use crate::model::{argmax, forward_step, tokenize, StepOutput, TokenId, WeightStore};
use crate::prism::{AgentHandle, AgentId};
use crate::synapse::SynapseSnapshot;

/// How a scripted thought's hidden state is presented to the gate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Use the hidden state the model actually produced for the thought.
    #[default]
    Natural,
    /// Present the river's own hidden state (score 1).
    Aligned,
    /// Present the negated river hidden state (score -1).
    Opposed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedThought {
    pub text: String,
    #[serde(default)]
    pub alignment: Alignment,
}

/// Deterministic overrides for reproducible runs.
///
/// `river_text` is emitted verbatim by the river before greedy decoding
/// resumes. `thoughts[i]` replaces the generation of the i-th spawned stream
/// agent; agents past the end of the list generate normally.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    #[serde(default)]
    pub river_text: String,
    #[serde(default)]
    pub thoughts: Vec<ScriptedThought>,
}

impl Script {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// A finished side-agent thought.
#[derive(Debug, Clone, PartialEq)]
pub struct Thought {
    pub agent_id: AgentId,
    pub tokens: Vec<TokenId>,
    /// Final-layer hidden state of the last thought token.
    pub hidden: Vec<f32>,
    pub alignment: Alignment,
}

/// Fills an empty stream cache with the snapshot's landmarks followed by the
/// tokenized payload, returning the last payload step.
pub(crate) fn seed_stream_cache(
    weights: &WeightStore,
    handle: &AgentHandle,
    snapshot: &SynapseSnapshot,
    payload: &str,
) -> Result<StepOutput> {
    if snapshot.is_empty() {
        return Err(CortexError::Precondition("cannot spawn from an empty snapshot".into()));
    }
    let tokens = tokenize(payload.as_bytes());
    if tokens.is_empty() {
        return Err(CortexError::Precondition("task payload is empty".into()));
    }
    let base = snapshot.next_position.max(snapshot.positions().last().map_or(0, |p| p + 1));
    let mut cache = handle.cache();
    if !cache.is_empty() {
        return Err(CortexError::Sequencing("stream cache was already seeded".into()));
    }
    cache.extend_from(&snapshot.to_cache(weights.config())?, crate::model::Origin::Context)?;
    let mut last = None;
    for (j, &t) in tokens.iter().enumerate() {
        last = Some(forward_step(weights, &mut cache, t, base + j)?);
    }
    Ok(last.expect("payload is non-empty"))
}

/// Greedy generation of up to `budget` tokens on a seeded stream cache, or
/// teacher-forced replay of a scripted thought.
pub(crate) fn generate_thought(
    weights: &WeightStore,
    handle: &AgentHandle,
    seeded: StepOutput,
    budget: usize,
    scripted: Option<&ScriptedThought>,
) -> Result<Thought> {
    let mut cache = handle.cache();
    let start = cache.last_context_position().map_or(0, |p| p + 1);
    let mut last = seeded;
    let mut tokens = Vec::new();
    let forced = scripted.map(|s| tokenize(s.text.as_bytes()));
    let steps = forced.as_ref().map_or(budget, |f| f.len().min(budget));
    for i in 0..steps {
        let token = match &forced {
            Some(f) => f[i],
            None => argmax(&last.logits) as TokenId,
        };
        last = forward_step(weights, &mut cache, token, start + i)?;
        tokens.push(token);
    }
    if tokens.is_empty() {
        return Err(CortexError::Precondition("thought produced no tokens".into()));
    }
    Ok(Thought {
        agent_id: handle.id,
        tokens,
        hidden: last.hidden,
        alignment: scripted.map(|s| s.alignment).unwrap_or_default(),
    })
}
