//! Cache-free reference forward pass.
//!
//! Recomputes every row of a sequence from scratch, layer by layer, under an
//! explicit visibility rule instead of an incremental KV cache. It shares no
//! code with [`crate::model::forward_step`] beyond reading the weight store,
//! and is used to check incremental decoding, thought encoding and
//! referential injection.

use crate::model::{TokenId, WeightStore};

/// Which stream a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// The main agent's own tokens.
    Main,
    /// An injected thought, identified by its thought index. Aux rows see only
    /// earlier rows of the same thought; main rows see every earlier aux row.
    Aux(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Row {
    pub token: TokenId,
    pub position: usize,
    pub segment: Segment,
}

impl Row {
    pub fn main(token: TokenId, position: usize) -> Self {
        Self { token, position, segment: Segment::Main }
    }

    pub fn aux(thought: usize, token: TokenId, position: usize) -> Self {
        Self { token, position, segment: Segment::Aux(thought) }
    }
}

fn visible(query: &Row, key: &Row) -> bool {
    match (query.segment, key.segment) {
        (Segment::Main, Segment::Main) => key.position <= query.position,
        (Segment::Main, Segment::Aux(_)) => true,
        (Segment::Aux(a), Segment::Aux(b)) => a == b && key.position <= query.position,
        (Segment::Aux(_), Segment::Main) => false,
    }
}

fn project(x: &[f32], w: &[f32], out: usize) -> Vec<f32> {
    (0..out)
        .map(|j| {
            let mut acc = 0.0f32;
            for (i, xi) in x.iter().enumerate() {
                acc += xi * w[i * out + j];
            }
            acc
        })
        .collect()
}

fn normalize(x: &[f32], gain: &[f32]) -> Vec<f32> {
    let mut sq = 0.0f32;
    for v in x {
        sq += v * v;
    }
    let inv = 1.0 / (sq / x.len() as f32 + crate::model::math::RMS_EPS).sqrt();
    x.iter().zip(gain).map(|(v, g)| v * inv * g).collect()
}

fn rotate(v: &mut [f32], d_k: usize, position: usize, base: f64) {
    if position == 0 {
        return;
    }
    for head in 0..v.len() / d_k {
        for j in 0..d_k / 2 {
            let theta = position as f64 * base.powf(-((2 * j) as f64) / d_k as f64);
            let (a, b) = (v[head * d_k + 2 * j] as f64, v[head * d_k + 2 * j + 1] as f64);
            v[head * d_k + 2 * j] = (a * theta.cos() - b * theta.sin()) as f32;
            v[head * d_k + 2 * j + 1] = (a * theta.sin() + b * theta.cos()) as f32;
        }
    }
}

fn gelu(x: f32) -> f32 {
    0.5 * x * (1.0 + (0.797_884_6f32 * (x + 0.044_715 * x * x * x)).tanh())
}

/// Per-row outputs of the reference pass.
#[derive(Debug, Clone)]
pub struct ReferenceOutput {
    pub logits: Vec<Vec<f32>>,
    pub hidden: Vec<Vec<f32>>,
    /// `keys[layer][row]`, rotated, heads concatenated.
    pub keys: Vec<Vec<Vec<f32>>>,
    pub values: Vec<Vec<Vec<f32>>>,
}

/// Full recomputation of `rows` in insertion order.
pub fn reference_forward(weights: &WeightStore, rows: &[Row]) -> ReferenceOutput {
    let cfg = weights.config();
    let (d, d_k) = (cfg.d_model, cfg.d_k);
    let n = rows.len();
    let mut xs: Vec<Vec<f32>> = rows.iter().map(|r| weights.embedding_row(r.token as usize).to_vec()).collect();
    let mut all_keys = Vec::with_capacity(cfg.n_layers);
    let mut all_values = Vec::with_capacity(cfg.n_layers);

    for layer in weights.layers() {
        let mut qs = Vec::with_capacity(n);
        let mut ks = Vec::with_capacity(n);
        let mut vs = Vec::with_capacity(n);
        for (x, row) in xs.iter().zip(rows) {
            let h = normalize(x, layer.attn_norm());
            let mut q = project(&h, layer.wq(), d);
            let mut k = project(&h, layer.wk(), d);
            rotate(&mut q, d_k, row.position, cfg.rope_base);
            rotate(&mut k, d_k, row.position, cfg.rope_base);
            qs.push(q);
            ks.push(k);
            vs.push(project(&h, layer.wv(), d));
        }

        for j in 0..n {
            let seen: Vec<usize> = (0..=j).filter(|&i| visible(&rows[j], &rows[i])).collect();
            let mut mixed = vec![0.0f32; d];
            for head in 0..cfg.n_heads {
                let lo = head * d_k;
                let mut w: Vec<f32> = seen
                    .iter()
                    .map(|&i| {
                        let mut s = 0.0f32;
                        for t in lo..lo + d_k {
                            s += qs[j][t] * ks[i][t];
                        }
                        s * (1.0 / (d_k as f32).sqrt())
                    })
                    .collect();
                let m = w.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
                let mut z = 0.0f32;
                for e in w.iter_mut() {
                    *e = (*e - m).exp();
                    z += *e;
                }
                for (&i, e) in seen.iter().zip(&w) {
                    let p = e / z;
                    for t in lo..lo + d_k {
                        mixed[t] += p * vs[i][t];
                    }
                }
            }
            let o = project(&mixed, layer.wo(), d);
            let x = &mut xs[j];
            for t in 0..d {
                x[t] += o[t];
            }
            let h2 = normalize(x, layer.mlp_norm());
            let up: Vec<f32> = project(&h2, layer.w_up(), cfg.d_ff()).into_iter().map(gelu).collect();
            let down = project(&up, layer.w_down(), d);
            for t in 0..d {
                x[t] += down[t];
            }
        }
        all_keys.push(ks);
        all_values.push(vs);
    }

    let hidden: Vec<Vec<f32>> = xs.iter().map(|x| normalize(x, weights.final_norm())).collect();
    let logits = hidden.iter().map(|h| project(h, weights.unembedding(), cfg.vocab_size)).collect();
    ReferenceOutput { logits, hidden, keys: all_keys, values: all_values }
}
