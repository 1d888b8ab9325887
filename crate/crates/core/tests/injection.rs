use cortex_core::harness::injection_case;
use cortex_core::injector::{encode_thought, River, VirtualPositions};
use cortex_core::model::{forward_step, init_weights, tokenize, KvCache, ModelConfig, Origin, TokenId};
use cortex_core::CortexError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn encoded_thought_equals_fresh_forward_steps() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let tokens = tokenize(b"check the sum");
    let enc = encode_thought(&w, &tokens, 6200).unwrap();
    let mut fresh = KvCache::new(w.config());
    for (j, &t) in tokens.iter().enumerate() {
        forward_step(&w, &mut fresh, t, 6200 + j).unwrap();
    }
    assert_eq!(enc.block, fresh);
    assert_eq!(enc.block.positions(), (6200..6213).collect::<Vec<_>>());
}

#[test]
fn injection_is_append_only_and_invisible() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let mut river = River::new(w.config());
    for &t in &tokenize(b"Seven plus five") {
        river.step(&w, t).unwrap();
    }
    let before = river.cache().clone();
    let visible = river.visible().to_vec();
    let rec = river.inject_thought(&w, &tokenize(b"is twelve"), 3).unwrap();
    assert_eq!((rec.token_count, rec.virtual_position_base, rec.applied_at_stream_position), (9, 6144, 15));

    let after = river.cache();
    assert_eq!(after.len(), before.len() + 9);
    for l in 0..4 {
        for i in 0..before.len() {
            assert_eq!(after.key(l, i), before.key(l, i));
            assert_eq!(after.value(l, i), before.value(l, i));
        }
    }
    assert!(after.origins()[before.len()..].iter().all(|&o| o == Origin::Injected));
    drop(after);
    assert_eq!(river.visible(), &visible[..]);

    // The next visible token still takes the next real position.
    river.step(&w, b'.' as TokenId).unwrap();
    assert_eq!(*river.cache().positions().last().unwrap(), 15);
    assert_eq!(river.inject_thought(&w, &[1], 4).unwrap().virtual_position_base, 6153);
}

#[test]
fn randomized_cases_match_inline_oracle() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let reserved = VirtualPositions::new(w.config()).reserved_start();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..12 {
        let prompt: Vec<TokenId> = (0..rng.random_range(1..20)).map(|_| rng.random_range(0..256)).collect();
        let n = rng.random_range(1..4);
        let mut base = reserved + rng.random_range(0..500);
        let mut thoughts = Vec::new();
        let mut bases = Vec::new();
        for _ in 0..n {
            let t: Vec<TokenId> = (0..rng.random_range(1..17)).map(|_| rng.random_range(0..256)).collect();
            bases.push(base);
            base += t.len();
            thoughts.push(t);
        }
        let (err, _) = injection_case(&w, &prompt, &thoughts, &bases, rng.random_range(0..256)).unwrap();
        assert!(err <= 1e-6, "relative error {err}");
    }
}

#[test]
fn some_thought_changes_the_next_token() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let prompt = tokenize(b"Seven plus five is");
    let changed = (0..16u32).any(|t| {
        let thought: Vec<TokenId> = (0..8).map(|i| (t * 16 + i * 3) % 256).collect();
        injection_case(&w, &prompt, &[thought], &[6144], b' ' as TokenId).unwrap().1
    });
    assert!(changed);
}

#[test]
fn thought_past_max_positions_is_a_capacity_error() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let mut river = River::new(w.config());
    river.step(&w, 1).unwrap();
    let long = vec![7; 2049];
    assert!(matches!(river.inject_thought(&w, &long, 0), Err(CortexError::Capacity { .. })));
    assert_eq!(river.cache().len(), 1);
    // A failed allocation does not consume reserved positions.
    assert_eq!(river.virtual_positions().peek(), 6144);
}
