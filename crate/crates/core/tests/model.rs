use cortex_core::model::{argmax, forward_step, init_weights, relative_error, KvCache, ModelConfig, Origin, TokenId};
use cortex_core::reference::{reference_forward, Row};
use cortex_core::CortexError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Float64 numpy forward pass (tests/oracles/forward.py) over the default
// seed-42 weights, tokens "Hi!" at positions 0..3, last-position logits.
const NUMPY_LOGITS_HEAD: [f64; 8] = [
    0.462889370869374,
    0.810379690442115,
    1.03806243731995,
    -0.4809421878784271,
    -0.6394475999859552,
    -0.8290981015563013,
    0.05733361461387597,
    -0.00013049432971701247,
];
const NUMPY_ARGMAX: usize = 105;
const NUMPY_NORM: f64 = 16.587545014153108;

#[test]
fn three_tokens_match_the_numpy_oracle() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let mut cache = KvCache::new(w.config());
    let mut logits = Vec::new();
    for (p, &t) in b"Hi!".iter().enumerate() {
        logits = forward_step(&w, &mut cache, t as TokenId, p).unwrap().logits;
    }
    let head: Vec<f32> = logits[..8].to_vec();
    let oracle: Vec<f32> = NUMPY_LOGITS_HEAD.iter().map(|&v| v as f32).collect();
    assert!(relative_error(&head, &oracle) < 1e-5, "{head:?}");
    assert_eq!(argmax(&logits), NUMPY_ARGMAX);
    let norm = logits.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    assert!((norm - NUMPY_NORM).abs() / NUMPY_NORM < 1e-5);
}

#[test]
fn incremental_decoding_matches_full_recompute() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let len = rng.random_range(1..40);
        let tokens: Vec<TokenId> = (0..len).map(|_| rng.random_range(0..256)).collect();
        let mut cache = KvCache::new(w.config());
        let steps: Vec<_> = tokens.iter().enumerate().map(|(p, &t)| forward_step(&w, &mut cache, t, p).unwrap()).collect();
        let rows: Vec<Row> = tokens.iter().enumerate().map(|(p, &t)| Row::main(t, p)).collect();
        let full = reference_forward(&w, &rows);
        for (i, s) in steps.iter().enumerate() {
            assert!(relative_error(&s.logits, &full.logits[i]) <= 1e-6);
            assert!(relative_error(&s.hidden, &full.hidden[i]) <= 1e-6);
        }
        for l in 0..4 {
            for i in 0..len {
                assert!(relative_error(cache.key(l, i), &full.keys[l][i]) <= 1e-6);
                assert!(relative_error(cache.value(l, i), &full.values[l][i]) <= 1e-6);
            }
        }
    }
}

#[test]
fn positions_must_increase_and_fit() {
    let w = init_weights(&ModelConfig::default()).unwrap();
    let mut cache = KvCache::new(w.config());
    forward_step(&w, &mut cache, 1, 5).unwrap();
    assert!(forward_step(&w, &mut cache, 1, 5).is_err());
    assert!(forward_step(&w, &mut cache, 1, 3).is_err());
    assert!(matches!(forward_step(&w, &mut cache, 1, 8192), Err(CortexError::Capacity { .. })));
    assert!(matches!(forward_step(&w, &mut cache, 256, 6), Err(CortexError::Precondition(_))));
    assert_eq!(cache.len(), 1);
    assert_eq!(cache.origins(), &[Origin::Context]);
}

#[test]
fn different_seeds_give_different_models() {
    let a = init_weights(&ModelConfig::default()).unwrap();
    let b = init_weights(&ModelConfig::default().with_seed(43)).unwrap();
    assert_ne!(a, b);
    assert_eq!(a.total_bytes(), b.total_bytes());
}
