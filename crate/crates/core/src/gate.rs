//! Cosine-similarity validation gate for side-agent thoughts.

use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};

pub const DEFAULT_THETA: f64 = 0.5;

/// Outcome of gating one thought. `score` is `None` when either vector was
/// all zeros; such thoughts are always rejected with `degenerate` set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub thought_id: u64,
    pub score: Option<f64>,
    pub threshold: f64,
    pub accepted: bool,
    pub degenerate: bool,
}

/// Cosine similarity of the main agent's hidden state and a thought's
/// last-token hidden state, clamped to [-1, 1].
pub fn gate_score(h_main: &[f32], t_side: &[f32]) -> Result<f64> {
    if h_main.len() != t_side.len() {
        return Err(CortexError::Precondition(format!(
            "hidden widths differ: {} vs {}",
            h_main.len(),
            t_side.len()
        )));
    }
    let (mut dot, mut hh, mut tt) = (0.0f64, 0.0f64, 0.0f64);
    for (&h, &t) in h_main.iter().zip(t_side) {
        let (h, t) = (h as f64, t as f64);
        dot += h * t;
        hh += h * h;
        tt += t * t;
    }
    if hh == 0.0 || tt == 0.0 {
        return Err(CortexError::Degenerate("zero hidden-state vector".into()));
    }
    Ok((dot / (hh * tt).sqrt()).clamp(-1.0, 1.0))
}

/// Accepts iff `score >= theta`.
pub fn decide(h_main: &[f32], t_side: &[f32], theta: f64, thought_id: u64) -> Result<GateDecision> {
    if !(-1.0..=1.0).contains(&theta) {
        return Err(CortexError::Config(format!("theta must lie in [-1, 1], got {theta}")));
    }
    Ok(match gate_score(h_main, t_side) {
        Ok(score) => GateDecision { thought_id, score: Some(score), threshold: theta, accepted: score >= theta, degenerate: false },
        Err(CortexError::Degenerate(_)) => {
            GateDecision { thought_id, score: None, threshold: theta, accepted: false, degenerate: true }
        }
        Err(e) => return Err(e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_scores() {
        let h = [1.0f32, 2.0, 2.0];
        assert!((gate_score(&h, &h).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gate_score(&[1.0, 0.0], &[0.0, 3.0]).unwrap(), 0.0);
        // (1,2,2).(2,1,2) = 8, norms 3 and 3.
        assert!((gate_score(&h, &[2.0, 1.0, 2.0]).unwrap() - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_score_is_accepted() {
        // dot 1, norms sqrt(2) * sqrt(2): exactly 0.5.
        let d = decide(&[1.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 1.0, 0.0], 0.5, 3).unwrap();
        assert_eq!(d.score, Some(0.5));
        assert!(d.accepted);
    }

    #[test]
    fn orthogonal_is_rejected_and_self_accepted() {
        assert!(!decide(&[1.0, 0.0], &[0.0, 1.0], DEFAULT_THETA, 0).unwrap().accepted);
        assert!(decide(&[0.2, 0.7], &[0.2, 0.7], DEFAULT_THETA, 0).unwrap().accepted);
    }

    #[test]
    fn zero_vector_is_a_flagged_rejection() {
        assert!(matches!(gate_score(&[0.0, 0.0], &[1.0, 0.0]), Err(CortexError::Degenerate(_))));
        let d = decide(&[1.0, 0.0], &[0.0, 0.0], -1.0, 9).unwrap();
        assert!(!d.accepted && d.degenerate && d.score.is_none());
    }

    #[test]
    fn theta_outside_range_is_rejected() {
        assert!(decide(&[1.0], &[1.0], 1.5, 0).is_err());
    }
}
