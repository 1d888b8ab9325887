//! Rotary position embeddings.
//!
//! Adjacent coordinate pairs `(2j, 2j + 1)` of a per-head vector are rotated
//! by `position * base^(-2j / d_k)`. Angles and the rotation itself are
//! evaluated in f64 and rounded once on the way out.

/// Returns `vector` rotated for `position`. `vector.len()` is the head width.
pub fn apply_rope(vector: &[f32], position: usize, rope_base: f64) -> Vec<f32> {
    let mut out = vector.to_vec();
    rotate_in_place(&mut out, position, rope_base);
    out
}

pub fn rotate_in_place(vector: &mut [f32], position: usize, rope_base: f64) {
    let width = vector.len();
    debug_assert!(width % 2 == 0, "rotary width must be even");
    if position == 0 {
        return;
    }
    for (j, pair) in vector.chunks_exact_mut(2).enumerate() {
        let inv_freq = rope_base.powf(-((2 * j) as f64) / width as f64);
        let (sin, cos) = (position as f64 * inv_freq).sin_cos();
        let (x0, x1) = (pair[0] as f64, pair[1] as f64);
        pair[0] = (x0 * cos - x1 * sin) as f32;
        pair[1] = (x0 * sin + x1 * cos) as f32;
    }
}

/// Rotates every head of a concatenated `[n_heads * d_k]` vector.
pub fn rotate_heads(vector: &mut [f32], d_k: usize, position: usize, rope_base: f64) {
    for head in vector.chunks_exact_mut(d_k) {
        rotate_in_place(head, position, rope_base);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn norm(v: &[f32]) -> f64 {
        v.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn position_zero_is_identity() {
        let v = [0.3f32, -1.2, 4.0, 0.5, 2.0, -0.25];
        assert_eq!(apply_rope(&v, 0, 10_000.0), v.to_vec());
    }

    #[test]
    fn matches_scalar_rotation_formula() {
        // Independent scalar evaluation, d_k = 4, base = 10000, position 1:
        //   pair 0: theta = 1 * 10000^0     = 1
        //   pair 1: theta = 1 * 10000^(-1/2) = 0.01
        // (1, 0) rotated by theta -> (cos theta, sin theta).
        let expected = [1f64.cos(), 1f64.sin(), 0.01f64.cos(), 0.01f64.sin()];
        let got = apply_rope(&[1.0, 0.0, 1.0, 0.0], 1, 10_000.0);
        for (g, e) in got.iter().zip(expected) {
            assert!((*g as f64 - e).abs() < 1e-7, "{g} vs {e}");
        }
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(
            v in prop::collection::vec(-10.0f32..10.0, 8),
            position in 0usize..8192,
        ) {
            let r = apply_rope(&v, position, 10_000.0);
            let (a, b) = (norm(&v), norm(&r));
            prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-30), "{a} vs {b}");
        }
    }
}
