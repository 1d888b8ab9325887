use cortex_core::router::{Diagnostic, Router, Trigger, MAX_PAYLOAD};
use proptest::prelude::*;
use regex::Regex;

/// Regex scan of the whole string: `(stream_position, payload)` pairs.
fn regex_oracle(s: &str) -> Vec<(usize, String)> {
    let re = Regex::new(r"\[TASK:([^\]]*)\]").unwrap();
    re.captures_iter(s)
        .filter_map(|c| {
            let payload = c[1].trim().to_string();
            (!payload.is_empty()).then(|| (c.get(0).unwrap().end() - 1, payload))
        })
        .collect()
}

fn chunked(s: &[u8], cuts: &[usize]) -> Vec<Trigger> {
    let mut r = Router::new();
    let mut out = Vec::new();
    let mut prev = 0;
    let mut cuts: Vec<usize> = cuts.iter().map(|c| c % (s.len() + 1)).collect();
    cuts.sort_unstable();
    for c in cuts.into_iter().chain(std::iter::once(s.len())) {
        out.extend(r.feed(&s[prev..c]));
        prev = c;
    }
    out
}

fn text_with_triggers() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[a-z ]{0,6}",
        Just("[TASK:".to_string()),
        Just("]".to_string()),
        Just("[TAS".to_string()),
        Just("[".to_string()),
        "\\[TASK: [a-z ]{0,8}\\]",
    ];
    prop::collection::vec(piece, 0..12).prop_map(|v| v.concat())
}

proptest! {
    #[test]
    fn chunking_never_changes_detection(s in text_with_triggers(), cuts in prop::collection::vec(0usize..200, 0..8)) {
        let whole = Router::new().feed_str(&s);
        prop_assert_eq!(&chunked(s.as_bytes(), &cuts), &whole);
        let found: Vec<(usize, String)> = whole.into_iter().map(|t| (t.stream_position, t.payload)).collect();
        prop_assert_eq!(found, regex_oracle(&s));
    }
}

#[test]
fn documented_examples() {
    let t = Router::new().feed_str("[TASK: verify the sum]");
    assert_eq!(t.len(), 1);
    assert_eq!(t[0].payload, "verify the sum");

    let mut r = Router::new();
    assert!(r.feed_str("[TAS").is_empty());
    assert_eq!(r.feed_str("K: check]")[0].payload, "check");
    assert!(Router::new().feed_str("no triggers here").is_empty());

    let mut r = Router::new();
    r.feed_str("[TASK: dangling");
    assert_eq!(r.flush(), vec![Diagnostic::Unterminated { start: 0 }]);
    assert!(r.flush().is_empty());
}

#[test]
fn overlong_payload_is_a_diagnostic() {
    let mut r = Router::new();
    let text = format!("[TASK:{}]", "x".repeat(MAX_PAYLOAD + 1));
    assert!(r.feed_str(&text).is_empty());
    assert_eq!(r.flush(), vec![Diagnostic::Overlong { start: 0 }]);

    let ok = format!("[TASK:{}]", "y".repeat(MAX_PAYLOAD));
    assert_eq!(Router::new().feed_str(&ok)[0].payload.len(), MAX_PAYLOAD);
}

#[test]
fn trigger_ids_count_up_and_positions_are_stream_indices() {
    let mut r = Router::starting_at(100);
    let t = r.feed_str("[TASK:a] [TASK:b]");
    assert_eq!(t.iter().map(|t| (t.trigger_id, t.stream_position)).collect::<Vec<_>>(), vec![(0, 107), (1, 116)]);
}
