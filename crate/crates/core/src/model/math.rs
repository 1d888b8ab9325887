//! Small dense kernels shared by the forward pass and the scorers.

use num_traits::Float;

pub const RMS_EPS: f32 = 1e-5;

/// Numerically stabilized softmax (max-subtraction).
///
/// An empty input yields an empty output.
pub fn softmax<T: Float>(scores: &[T]) -> Vec<T> {
    let mut out = scores.to_vec();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place<T: Float>(scores: &mut [T]) {
    if scores.is_empty() {
        return;
    }
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let mut sum = T::zero();
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        sum = sum + *s;
    }
    for s in scores.iter_mut() {
        *s = *s / sum;
    }
}

pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// `x · W` for a row-major `W` of shape `[x.len(), out_dim]`.
pub fn vec_mat(x: &[f32], w: &[f32], out_dim: usize) -> Vec<f32> {
    debug_assert_eq!(w.len(), x.len() * out_dim);
    let mut y = vec![0.0f32; out_dim];
    for (i, &xi) in x.iter().enumerate() {
        let row = &w[i * out_dim..(i + 1) * out_dim];
        for (yj, &wij) in y.iter_mut().zip(row) {
            *yj += xi * wij;
        }
    }
    y
}

pub fn rms_norm(x: &[f32], gain: &[f32]) -> Vec<f32> {
    let mut ms = 0.0f32;
    for v in x {
        ms += v * v;
    }
    ms /= x.len() as f32;
    let inv = 1.0 / (ms + RMS_EPS).sqrt();
    x.iter().zip(gain).map(|(v, g)| v * inv * g).collect()
}

/// tanh approximation of GELU.
pub fn gelu(x: f32) -> f32 {
    const C: f32 = 0.797_884_6; // sqrt(2 / pi)
    0.5 * x * (1.0 + (C * (x + 0.044_715 * x * x * x)).tanh())
}

/// Max-norm relative deviation: `max |a_i - b_i| / max |b_i|`.
///
/// `b` is the reference. Two all-zero vectors have deviation 0.
pub fn relative_error(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len(), "relative_error on vectors of different length");
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        diff = diff.max((x as f64 - y as f64).abs());
        scale = scale.max((y as f64).abs());
    }
    if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

pub fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
