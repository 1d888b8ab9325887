//! Shared-weight multi-agent inference runtime.
//!
//! One main agent (the river) decodes greedily over a toy transformer while
//! side agents (streams) reason over a landmark-compressed view of its KV
//! cache. Side-agent thoughts that pass a cosine-similarity gate are folded
//! back into the river's cache at virtual positions, never into its text.

pub mod error;
pub mod gate;
pub mod harness;
pub mod injector;
pub mod model;
pub mod prism;
pub mod reference;
pub mod router;
pub mod scheduler;
pub mod synapse;

pub use error::{CortexError, Result};
