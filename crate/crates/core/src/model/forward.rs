use super::cache::{KvCache, Origin};
use super::math::{gelu, rms_norm, softmax_in_place, vec_mat};
use super::rope::rotate_heads;
use super::weights::WeightStore;
use crate::error::{CortexError, Result};

pub type TokenId = u32;

/// Result of one incremental decoding step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Next-token logits, `vocab_size` long.
    pub logits: Vec<f32>,
    /// Final-layer hidden state of this token (after the final norm).
    pub hidden: Vec<f32>,
    /// Rotated final-layer query of this token, heads concatenated.
    pub query: Vec<f32>,
}

/// Runs one token through the model and appends its K/V to `cache`.
///
/// The new token attends to every entry already in the cache plus itself.
/// Context entries all sit at earlier positions (enforced here), and
/// injected entries are attendable by construction. On error the cache is
/// left untouched.
pub fn forward_step(
    weights: &WeightStore,
    cache: &mut KvCache,
    token: TokenId,
    position: usize,
) -> Result<StepOutput> {
    let cfg = weights.config();
    if position >= cfg.max_positions {
        return Err(CortexError::Capacity { position, limit: cfg.max_positions });
    }
    if token as usize >= cfg.vocab_size {
        return Err(CortexError::Precondition(format!(
            "token {token} outside vocabulary of {}",
            cfg.vocab_size
        )));
    }
    if cache.n_layers() != cfg.n_layers || cache.d_model() != cfg.d_model {
        return Err(CortexError::Precondition("cache shape does not match the model".into()));
    }
    cache.check_position(position, Origin::Context)?;

    let d = cfg.d_model;
    let d_k = cfg.d_k;
    let scale = 1.0 / (d_k as f32).sqrt();
    let mut x = weights.embedding_row(token as usize).to_vec();
    let mut query = Vec::new();

    cache.open_entry(position, Origin::Context);
    let n = cache.len();

    for (l, layer) in weights.layers().iter().enumerate() {
        let h = rms_norm(&x, layer.attn_norm());
        let mut q = vec_mat(&h, layer.wq(), d);
        let mut k = vec_mat(&h, layer.wk(), d);
        let v = vec_mat(&h, layer.wv(), d);
        rotate_heads(&mut q, d_k, position, cfg.rope_base);
        rotate_heads(&mut k, d_k, position, cfg.rope_base);
        cache.push_layer(l, &k, &v);

        let keys = cache.layer_keys(l);
        let values = cache.layer_values(l);
        let mut attn = vec![0.0f32; d];
        let mut scores = vec![0.0f32; n];
        for head in 0..cfg.n_heads {
            let span = head * d_k..(head + 1) * d_k;
            let qh = &q[span.clone()];
            for (i, s) in scores.iter_mut().enumerate() {
                let kh = &keys[i * d + head * d_k..i * d + (head + 1) * d_k];
                let mut acc = 0.0f32;
                for (a, b) in qh.iter().zip(kh) {
                    acc += a * b;
                }
                *s = acc * scale;
            }
            softmax_in_place(&mut scores);
            let out = &mut attn[span];
            for (i, &p) in scores.iter().enumerate() {
                let vh = &values[i * d + head * d_k..i * d + (head + 1) * d_k];
                for (o, &vv) in out.iter_mut().zip(vh) {
                    *o += p * vv;
                }
            }
        }
        let proj = vec_mat(&attn, layer.wo(), d);
        for (xi, pi) in x.iter_mut().zip(&proj) {
            *xi += pi;
        }

        let h2 = rms_norm(&x, layer.mlp_norm());
        let mut up = vec_mat(&h2, layer.w_up(), cfg.d_ff());
        for u in up.iter_mut() {
            *u = gelu(*u);
        }
        let down = vec_mat(&up, layer.w_down(), d);
        for (xi, di) in x.iter_mut().zip(&down) {
            *xi += di;
        }

        if l + 1 == cfg.n_layers {
            query = q;
        }
    }

    let hidden = rms_norm(&x, weights.final_norm());
    let logits = vec_mat(&hidden, weights.unembedding(), cfg.vocab_size);
    Ok(StepOutput { logits, hidden, query })
}
