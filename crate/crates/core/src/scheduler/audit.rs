use std::fmt;
use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prism::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Spawned,
    SnapshotRead,
    ThoughtDone,
    Gated,
    Injected,
    Rejected,
    Aborted,
    /// Trigger seen while the stream-agent cap was reached; no agent exists.
    TriggerDropped,
    /// River published a new landmark snapshot.
    SynapsePush,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Spawned => "spawned",
            EventKind::SnapshotRead => "snapshot_read",
            EventKind::ThoughtDone => "thought_done",
            EventKind::Gated => "gated",
            EventKind::Injected => "injected",
            EventKind::Rejected => "rejected",
            EventKind::Aborted => "aborted",
            EventKind::TriggerDropped => "trigger_dropped",
            EventKind::SynapsePush => "synapse_push",
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, EventKind::Injected | EventKind::Rejected | EventKind::Aborted)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One audit row. `logical_time` counts river tokens processed so far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentLifecycleEvent {
    pub logical_time: usize,
    pub agent_id: Option<AgentId>,
    pub kind: EventKind,
    pub detail: String,
}

/// Append-only, many-producer event log stamped with the river's clock.
#[derive(Debug, Clone, Default)]
pub struct AuditLog {
    clock: Arc<AtomicUsize>,
    events: Arc<Mutex<Vec<AgentLifecycleEvent>>>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn set_time(&self, t: usize) {
        self.clock.store(t, Ordering::SeqCst);
    }

    pub fn now(&self) -> usize {
        self.clock.load(Ordering::SeqCst)
    }

    pub fn record(&self, agent_id: Option<AgentId>, kind: EventKind, detail: impl Into<String>) {
        let event = AgentLifecycleEvent { logical_time: self.now(), agent_id, kind, detail: detail.into() };
        self.events.lock().unwrap_or_else(|e| e.into_inner()).push(event);
    }

    pub fn events(&self) -> Vec<AgentLifecycleEvent> {
        self.events.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

/// CSV with columns `logical_time, agent_id, event, detail`.
pub fn write_audit_csv<W: Write>(events: &[AgentLifecycleEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["logical_time", "agent_id", "event", "detail"])?;
    for e in events {
        w.write_record([
            e.logical_time.to_string(),
            e.agent_id.map(|a| a.to_string()).unwrap_or_default(),
            e.kind.as_str().to_string(),
            e.detail.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Event kinds recorded for `agent`, in log order.
pub fn agent_trail(events: &[AgentLifecycleEvent], agent: AgentId) -> Vec<EventKind> {
    events.iter().filter(|e| e.agent_id == Some(agent)).map(|e| e.kind).collect()
}
