//! Streaming detector for `[TASK: ...]` triggers in the main agent's output.
//!
//! Grammar: the literal bytes `[TASK:`, then any bytes other than `]`, then
//! `]`. No nesting; matching is case-sensitive. The detector is a byte
//! automaton, so chunk boundaries never change what is found.

use serde::{Deserialize, Serialize};

const OPENER: &[u8] = b"[TASK:";

/// Longest accepted payload, in bytes, before trimming.
pub const MAX_PAYLOAD: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trigger {
    pub trigger_id: u64,
    /// Stream index (token = byte) of the closing bracket.
    pub stream_position: usize,
    pub payload: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Diagnostic {
    /// `[TASK:` opened at `start` was never closed.
    Unterminated { start: usize },
    /// Payload grew past [`MAX_PAYLOAD`]; the opener at `start` was abandoned.
    Overlong { start: usize },
    /// Closed at `stream_position` with a blank payload.
    EmptyPayload { stream_position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum State {
    /// Number of opener bytes matched so far.
    Scanning(usize),
    Payload { start: usize, bytes: Vec<u8> },
}

#[derive(Debug, Clone)]
pub struct Router {
    state: State,
    offset: usize,
    next_id: u64,
    diagnostics: Vec<Diagnostic>,
}

impl Default for Router {
    fn default() -> Self {
        Self::new()
    }
}

impl Router {
    pub fn new() -> Self {
        Self { state: State::Scanning(0), offset: 0, next_id: 0, diagnostics: Vec::new() }
    }

    /// A router whose first byte sits at stream index `offset`.
    pub fn starting_at(offset: usize) -> Self {
        Self { offset, ..Self::new() }
    }

    /// Stream index of the next byte.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn feed(&mut self, chunk: &[u8]) -> Vec<Trigger> {
        let mut found = Vec::new();
        for &b in chunk {
            if let Some(t) = self.push_byte(b) {
                found.push(t);
            }
            self.offset += 1;
        }
        found
    }

    pub fn feed_str(&mut self, chunk: &str) -> Vec<Trigger> {
        self.feed(chunk.as_bytes())
    }

    fn push_byte(&mut self, b: u8) -> Option<Trigger> {
        match &mut self.state {
            State::Scanning(matched) => {
                if b == OPENER[*matched] {
                    *matched += 1;
                    if *matched == OPENER.len() {
                        self.state = State::Payload { start: self.offset + 1 - OPENER.len(), bytes: Vec::new() };
                    }
                } else {
                    // '[' only occurs at the head of the opener.
                    *matched = usize::from(b == OPENER[0]);
                }
                None
            }
            State::Payload { start, bytes } => {
                if b == b']' {
                    let text = String::from_utf8_lossy(bytes).trim().to_string();
                    self.state = State::Scanning(0);
                    if text.is_empty() {
                        self.diagnostics.push(Diagnostic::EmptyPayload { stream_position: self.offset });
                        return None;
                    }
                    let id = self.next_id;
                    self.next_id += 1;
                    return Some(Trigger { trigger_id: id, stream_position: self.offset, payload: text });
                }
                if bytes.len() == MAX_PAYLOAD {
                    self.diagnostics.push(Diagnostic::Overlong { start: *start });
                    self.state = State::Scanning(usize::from(b == OPENER[0]));
                    return None;
                }
                bytes.push(b);
                None
            }
        }
    }

    /// Ends the stream: reports anything dangling plus accumulated
    /// diagnostics, then resets all state.
    pub fn flush(&mut self) -> Vec<Diagnostic> {
        if let State::Payload { start, .. } = self.state {
            self.diagnostics.push(Diagnostic::Unterminated { start });
        }
        let out = std::mem::take(&mut self.diagnostics);
        *self = Self::new();
        out
    }
}
