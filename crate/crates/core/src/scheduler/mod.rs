//! River and stream lanes.
//!
//! The river decodes greedily. At every token boundary it (1) drains the
//! queue of finished thoughts, gating and injecting them, (2) publishes a
//! landmark snapshot every `synapse_push_period` tokens and (3) spawns a
//! stream agent for each trigger the router saw in the token just emitted.
//! Stream agents condition only on a snapshot plus their task payload. The
//! river never waits on them until the run is over.
//!
//! In single-lane mode stream agents run to completion at the boundary that
//! started them, which makes runs bit-reproducible. In multi-lane mode each
//! stream agent gets its own thread.

mod agent;
mod audit;

use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use agent::{Alignment, Script, ScriptedThought, Thought};
pub use audit::{agent_trail, write_audit_csv, AgentLifecycleEvent, AuditLog, EventKind};

use crate::error::{CortexError, Result};
use crate::gate::{decide, GateDecision, DEFAULT_THETA};
use crate::injector::{boundary_queue, BoundaryReceiver, BoundarySender, InjectionRecord, River, VirtualPositions};
use crate::model::{argmax, detokenize, forward_step, tokenize, KvCache, TokenId, WeightStore};
use crate::prism::{AgentHandle, AgentId, MemoryReport, Prism, Role};
use crate::router::{Diagnostic, Router, Trigger};
use crate::synapse::{select_landmarks, synapse_channel, SynapseReader, SynapseSnapshot, DEFAULT_K, DEFAULT_LAMBDA};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuntimeConfig {
    /// Landmarks per snapshot.
    pub k: usize,
    /// Coverage weight of the hybrid sampler.
    pub lambda: f64,
    /// Gate threshold.
    pub theta: f64,
    /// Cap on live stream agents (N).
    pub max_stream_agents: usize,
    /// Most tokens one stream agent may generate.
    pub thought_budget: usize,
    /// Publish a snapshot every this many river tokens.
    pub synapse_push_period: usize,
    /// River generation budget after the prompt.
    pub max_new_tokens: usize,
    pub single_lane: bool,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            lambda: DEFAULT_LAMBDA,
            theta: DEFAULT_THETA,
            max_stream_agents: 8,
            thought_budget: 16,
            synapse_push_period: 8,
            max_new_tokens: 64,
            single_lane: true,
        }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.max_stream_agents == 0 || self.thought_budget == 0 || self.synapse_push_period == 0 {
            return Err(CortexError::Config(
                "k, max_stream_agents, thought_budget and synapse_push_period must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(CortexError::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(-1.0..=1.0).contains(&self.theta) {
            return Err(CortexError::Config(format!("theta must lie in [-1, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub prompt_tokens: Vec<TokenId>,
    pub generated_tokens: Vec<TokenId>,
}

impl Transcript {
    /// Prompt and generated bytes, lossily decoded.
    pub fn text(&self) -> String {
        let mut bytes = detokenize(&self.prompt_tokens);
        bytes.extend(detokenize(&self.generated_tokens));
        String::from_utf8_lossy(&bytes).into_owned()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub transcript: Transcript,
    pub audit: Vec<AgentLifecycleEvent>,
    pub triggers: Vec<Trigger>,
    pub decisions: Vec<GateDecision>,
    pub injections: Vec<InjectionRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Registry state after every stream agent has retired.
    pub memory: MemoryReport,
    pub max_live_streams: usize,
    /// Wall-clock time of the river's generation loop. Not part of the audit.
    pub river_elapsed: Duration,
}

impl RunOutput {
    pub fn agents(&self) -> Vec<AgentId> {
        let mut ids: Vec<AgentId> = self
            .audit
            .iter()
            .filter(|e| e.kind == EventKind::Spawned)
            .filter_map(|e| e.agent_id)
            .collect();
        ids.dedup();
        ids
    }
}

/// Greedy decoding with no side activity: the purity baseline.
pub fn generate_bare(weights: &WeightStore, prompt: &[TokenId], max_new_tokens: usize) -> Result<Vec<TokenId>> {
    if prompt.is_empty() {
        return Err(CortexError::Precondition("prompt must not be empty".into()));
    }
    let mut cache = KvCache::new(weights.config());
    let mut last = None;
    for (p, &t) in prompt.iter().enumerate() {
        last = Some(forward_step(weights, &mut cache, t, p)?);
    }
    let mut out = Vec::with_capacity(max_new_tokens);
    for i in 0..max_new_tokens {
        let t = argmax(&last.as_ref().expect("prompt is non-empty").logits) as TokenId;
        out.push(t);
        last = Some(forward_step(weights, &mut cache, t, prompt.len() + i)?);
    }
    Ok(out)
}

type Outcome = (AgentId, Result<Thought>);

struct Waiting {
    handle: AgentHandle,
    payload: String,
    script: Option<ScriptedThought>,
    deadline: usize,
}

struct StreamJob {
    weights: Arc<WeightStore>,
    handle: AgentHandle,
    snapshot: Arc<SynapseSnapshot>,
    payload: String,
    budget: usize,
    script: Option<ScriptedThought>,
    audit: AuditLog,
    results: BoundarySender<Outcome>,
}

impl StreamJob {
    fn run(self) {
        let result = agent::seed_stream_cache(&self.weights, &self.handle, &self.snapshot, &self.payload)
            .and_then(|seeded| agent::generate_thought(&self.weights, &self.handle, seeded, self.budget, self.script.as_ref()));
        if let Ok(t) = &result {
            self.audit.record(
                Some(self.handle.id),
                EventKind::ThoughtDone,
                format!("tokens={} text={:?}", t.tokens.len(), String::from_utf8_lossy(&detokenize(&t.tokens))),
            );
        }
        self.results.send((self.handle.id, result));
    }
}

pub struct Scheduler {
    prism: Arc<Prism>,
    config: RuntimeConfig,
}

impl Scheduler {
    pub fn new(prism: Arc<Prism>, config: RuntimeConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { prism, config })
    }

    pub fn prism(&self) -> &Arc<Prism> {
        &self.prism
    }

    pub fn config(&self) -> &RuntimeConfig {
        &self.config
    }

    /// Registers a stream agent whose cache is the snapshot's landmark K/V
    /// followed by the tokenized task payload.
    pub fn spawn_stream_agent(&self, trigger: &Trigger, snapshot: &SynapseSnapshot) -> Result<AgentHandle> {
        if snapshot.is_empty() {
            return Err(CortexError::Precondition("cannot spawn from an empty snapshot".into()));
        }
        let handle = self.register_stream()?;
        if let Err(e) = agent::seed_stream_cache(self.prism.weights(), &handle, snapshot, &trigger.payload) {
            self.prism.retire(handle.id);
            return Err(e);
        }
        Ok(handle)
    }

    fn register_stream(&self) -> Result<AgentHandle> {
        if self.prism.live_streams() >= self.config.max_stream_agents {
            return Err(CortexError::AgentCap { cap: self.config.max_stream_agents });
        }
        self.prism.register_agent(Role::Stream)
    }

    /// Runs the river over `prompt` with all side activity enabled.
    pub fn run(&self, prompt: &[u8], script: Option<&Script>) -> Result<RunOutput> {
        let empty = Script::default();
        let script = script.unwrap_or(&empty);
        let prompt_tokens = tokenize(prompt);
        if prompt_tokens.is_empty() {
            return Err(CortexError::Precondition("prompt must not be empty".into()));
        }
        let weights = self.prism.weights().clone();
        let river_handle = self.prism.register_agent(Role::River)?;
        let result = RunState::new(self, &river_handle, script, weights).and_then(|s| s.drive(&prompt_tokens));
        // The river's cache stays registered only for the report above.
        self.prism.retire(river_handle.id);
        result
    }
}

struct RunState<'a> {
    sched: &'a Scheduler,
    weights: Arc<WeightStore>,
    script: &'a Script,
    river_id: AgentId,
    river: River,
    router: Router,
    synapse: crate::synapse::SynapseWriter,
    reader: SynapseReader,
    audit: AuditLog,
    results_tx: BoundarySender<Outcome>,
    results_rx: BoundaryReceiver<Outcome>,
    waiting: Vec<Waiting>,
    workers: Vec<JoinHandle<()>>,
    outstanding: usize,
    spawned: usize,
    max_live: usize,
    triggers: Vec<Trigger>,
    decisions: Vec<GateDecision>,
    injections: Vec<InjectionRecord>,
}

impl<'a> RunState<'a> {
    fn new(sched: &'a Scheduler, river_handle: &AgentHandle, script: &'a Script, weights: Arc<WeightStore>) -> Result<Self> {
        let (synapse, reader) = synapse_channel();
        let (results_tx, results_rx) = boundary_queue();
        Ok(Self {
            river: River::for_agent(river_handle, VirtualPositions::new(weights.config())),
            river_id: river_handle.id,
            sched,
            weights,
            script,
            router: Router::new(),
            synapse,
            reader,
            audit: AuditLog::new(),
            results_tx,
            results_rx,
            waiting: Vec::new(),
            workers: Vec::new(),
            outstanding: 0,
            spawned: 0,
            max_live: 0,
            triggers: Vec::new(),
            decisions: Vec::new(),
            injections: Vec::new(),
        })
    }

    fn drive(mut self, prompt: &[TokenId]) -> Result<RunOutput> {
        let cfg = self.sched.config;
        // Prompt bytes are not routed, but trigger positions index the whole stream.
        self.router = Router::starting_at(prompt.len());
        for &t in prompt {
            self.river.step(&self.weights, t)?;
            self.boundary(None)?;
        }

        let forced = tokenize(self.script.river_text.as_bytes());
        let mut generated = Vec::with_capacity(cfg.max_new_tokens);
        let started = Instant::now();
        for i in 0..cfg.max_new_tokens {
            let token = match forced.get(i) {
                Some(&t) => t,
                None => argmax(&self.river.last_output().expect("prompt was processed").logits) as TokenId,
            };
            self.river.step(&self.weights, token)?;
            generated.push(token);
            self.boundary(Some(token))?;
        }
        let river_elapsed = started.elapsed();

        self.finish()?;
        let memory = self.sched.prism.memory_report();
        Ok(RunOutput {
            transcript: Transcript { prompt_tokens: prompt.to_vec(), generated_tokens: generated },
            audit: self.audit.events(),
            triggers: self.triggers,
            decisions: self.decisions,
            injections: self.injections,
            diagnostics: self.router.flush(),
            memory,
            max_live_streams: self.max_live,
            river_elapsed,
        })
    }

    /// Work done between two river tokens. `emitted` is the generated token
    /// just produced, if any (prompt tokens are not routed).
    fn boundary(&mut self, emitted: Option<TokenId>) -> Result<()> {
        let now = self.river.visible().len();
        self.audit.set_time(now);

        for outcome in self.results_rx.drain() {
            self.settle(outcome)?;
        }

        if self.river.next_position() % self.sched.config.synapse_push_period == 0 {
            self.push_snapshot()?;
        }

        self.resume_waiting(now);

        if let Some(token) = emitted.filter(|&t| t < 256) {
            for trigger in self.router.feed(&[token as u8]) {
                self.on_trigger(trigger, now);
            }
        }
        Ok(())
    }

    fn push_snapshot(&mut self) -> Result<()> {
        let query = self.river.last_output().expect("a step preceded the boundary").query.clone();
        let snapshot = {
            let cache = self.river.cache();
            select_landmarks(&cache, &query, self.weights.config().n_heads, self.sched.config.k, self.sched.config.lambda)?
        };
        let published = self.synapse.push(snapshot);
        self.audit.record(
            Some(self.river_id),
            EventKind::SynapsePush,
            format!("version={} landmarks={} source_length={}", published.version, published.len(), published.source_length),
        );
        Ok(())
    }

    fn on_trigger(&mut self, trigger: Trigger, now: usize) {
        self.triggers.push(trigger.clone());
        let handle = match self.sched.register_stream() {
            Ok(h) => h,
            Err(e) => {
                self.audit.record(None, EventKind::TriggerDropped, format!("trigger={} reason={e}", trigger.trigger_id));
                return;
            }
        };
        let script = self.script.thoughts.get(self.spawned).cloned();
        self.spawned += 1;
        self.outstanding += 1;
        self.max_live = self.max_live.max(self.sched.prism.live_streams());
        self.audit.record(
            Some(handle.id),
            EventKind::Spawned,
            format!("trigger={} payload={:?}", trigger.trigger_id, trigger.payload),
        );
        match self.reader.read_latest() {
            Ok(snapshot) => self.start(handle, snapshot, trigger.payload, script),
            Err(_) => self.waiting.push(Waiting {
                handle,
                payload: trigger.payload,
                script,
                deadline: now + self.sched.config.synapse_push_period,
            }),
        }
    }

    fn resume_waiting(&mut self, now: usize) {
        if self.waiting.is_empty() {
            return;
        }
        let snapshot = self.reader.read_latest().ok();
        for w in std::mem::take(&mut self.waiting) {
            match &snapshot {
                Some(s) => self.start(w.handle, s.clone(), w.payload, w.script),
                None if now >= w.deadline => self.abort(w.handle.id, "no snapshot within one push period"),
                None => self.waiting.push(w),
            }
        }
    }

    fn start(&mut self, handle: AgentHandle, snapshot: Arc<SynapseSnapshot>, payload: String, script: Option<ScriptedThought>) {
        self.audit.record(
            Some(handle.id),
            EventKind::SnapshotRead,
            format!(
                "version={} landmarks={} source_length={} river_position={}",
                snapshot.version,
                snapshot.len(),
                snapshot.source_length,
                self.river.next_position()
            ),
        );
        let job = StreamJob {
            weights: self.weights.clone(),
            handle,
            snapshot,
            payload,
            budget: self.sched.config.thought_budget,
            script,
            audit: self.audit.clone(),
            results: self.results_tx.clone(),
        };
        if self.sched.config.single_lane {
            job.run();
        } else {
            self.workers.push(std::thread::spawn(move || job.run()));
        }
    }

    fn abort(&mut self, id: AgentId, reason: &str) {
        self.audit.record(Some(id), EventKind::Aborted, reason);
        self.sched.prism.retire(id);
        self.outstanding -= 1;
    }

    /// Gates a finished thought against the river's current hidden state and
    /// injects it if accepted.
    fn settle(&mut self, (id, result): Outcome) -> Result<()> {
        let thought = match result {
            Ok(t) => t,
            Err(e) => {
                self.abort(id, &format!("stream failed: {e}"));
                return Ok(());
            }
        };
        let h_main = self.river.last_output().expect("river has stepped").hidden.clone();
        let t_side = match thought.alignment {
            Alignment::Natural => thought.hidden.clone(),
            Alignment::Aligned => h_main.clone(),
            Alignment::Opposed => h_main.iter().map(|v| -v).collect(),
        };
        let decision = decide(&h_main, &t_side, self.sched.config.theta, id)?;
        self.decisions.push(decision);
        self.audit.record(
            Some(id),
            EventKind::Gated,
            format!(
                "score={} theta={} accepted={}",
                decision.score.map_or("undefined".to_string(), |s| format!("{s:.6}")),
                decision.threshold,
                decision.accepted
            ),
        );
        if decision.accepted {
            match self.river.inject_thought(&self.weights, &thought.tokens, id) {
                Ok(record) => {
                    self.audit.record(
                        Some(id),
                        EventKind::Injected,
                        format!(
                            "base={} tokens={} stream_position={}",
                            record.virtual_position_base, record.token_count, record.applied_at_stream_position
                        ),
                    );
                    self.injections.push(record);
                }
                Err(e) => {
                    self.abort(id, &format!("injection failed: {e}"));
                    return Ok(());
                }
            }
        } else {
            let why = if decision.degenerate { "degenerate hidden state" } else { "score below threshold" };
            self.audit.record(Some(id), EventKind::Rejected, why);
        }
        self.sched.prism.retire(id);
        self.outstanding -= 1;
        Ok(())
    }

    /// Settles every remaining agent after the river's last token.
    fn finish(&mut self) -> Result<()> {
        for w in std::mem::take(&mut self.waiting) {
            self.abort(w.handle.id, "river finished before a snapshot was available");
        }
        if self.sched.config.single_lane {
            for o in self.results_rx.drain() {
                self.settle(o)?;
            }
        } else {
            while self.outstanding > 0 {
                match self.results_rx.recv() {
                    Some(o) => self.settle(o)?,
                    None => break,
                }
            }
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_weights, ModelConfig};

    fn scheduler(config: RuntimeConfig) -> Scheduler {
        let prism = Arc::new(Prism::new(init_weights(&ModelConfig::default()).unwrap()));
        Scheduler::new(prism, config).unwrap()
    }

    #[test]
    fn invalid_runtime_config_is_rejected() {
        let prism = Arc::new(Prism::new(init_weights(&ModelConfig::default()).unwrap()));
        let bad = RuntimeConfig { theta: 2.0, ..RuntimeConfig::default() };
        assert!(Scheduler::new(prism.clone(), bad).is_err());
        let bad = RuntimeConfig { k: 0, ..RuntimeConfig::default() };
        assert!(Scheduler::new(prism, bad).is_err());
    }

    #[test]
    fn spawn_seeds_landmarks_then_payload() {
        let s = scheduler(RuntimeConfig { k: 4, ..RuntimeConfig::default() });
        let w = s.prism().weights().clone();
        let mut river = River::new(w.config());
        for t in b"hello world" {
            river.step(&w, *t as TokenId).unwrap();
        }
        let q = river.last_output().unwrap().query.clone();
        let snap = select_landmarks(&river.cache(), &q, 4, 4, 0.5).unwrap();
        let trig = Trigger { trigger_id: 0, stream_position: 0, payload: "abc".into() };
        let a = s.spawn_stream_agent(&trig, &snap).unwrap();
        let b = s.spawn_stream_agent(&trig, &snap).unwrap();
        assert_eq!(a.cache().len(), 4 + 3);
        assert_eq!(*a.cache(), *b.cache());
        assert_eq!(a.cache().positions()[4..], [11, 12, 13]);
    }

    #[test]
    fn cap_is_enforced_on_spawn() {
        let s = scheduler(RuntimeConfig { max_stream_agents: 1, k: 2, ..RuntimeConfig::default() });
        let w = s.prism().weights().clone();
        let mut river = River::new(w.config());
        river.step(&w, 1).unwrap();
        river.step(&w, 2).unwrap();
        let q = river.last_output().unwrap().query.clone();
        let snap = select_landmarks(&river.cache(), &q, 4, 2, 0.5).unwrap();
        let trig = Trigger { trigger_id: 0, stream_position: 0, payload: "x".into() };
        s.spawn_stream_agent(&trig, &snap).unwrap();
        assert!(matches!(s.spawn_stream_agent(&trig, &snap), Err(CortexError::AgentCap { cap: 1 })));
    }
}
