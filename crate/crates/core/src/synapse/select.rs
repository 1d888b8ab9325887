//! Hybrid density-coverage landmark selection.
//!
//! Density is the per-head softmax attention mass each cached token receives
//! from the current query, summed over heads. Coverage is the farthest-point
//! distance of a token to the landmarks picked so far. Each greedy round
//! rescales both terms to [0, 1] over the remaining candidates and picks the
//! best `lambda * coverage + (1 - lambda) * density`.

use super::cloud::{euclidean, PointCloud};
use super::snapshot::{LandmarkEntry, SynapseSnapshot};
use crate::error::{CortexError, Result};
use crate::model::{math::softmax_in_place, KvCache};

/// Default mixing weight between coverage and density.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Default number of landmarks.
pub const DEFAULT_K: usize = 64;

/// Keys of the given cache entries at `layer`, heads concatenated, as f64 points.
pub fn key_cloud(cache: &KvCache, layer: usize, indices: &[usize]) -> PointCloud {
    let mut coords = Vec::with_capacity(indices.len() * cache.d_model());
    for &i in indices {
        coords.extend(cache.key(layer, i).iter().map(|&v| v as f64));
    }
    PointCloud::new(cache.d_model(), coords).expect("d_model is positive")
}

/// `A_i = sum_h softmax_i(q_h . k_{i,h} / sqrt(d_k))` over the points of `keys`.
///
/// `query` and each key are `n_heads * d_k` wide.
pub fn density_scores(query: &[f64], keys: &PointCloud, n_heads: usize) -> Result<Vec<f64>> {
    if keys.is_empty() {
        return Err(CortexError::Precondition("attention scores need a non-empty cache".into()));
    }
    if n_heads == 0 || query.len() != keys.dim() || keys.dim() % n_heads != 0 {
        return Err(CortexError::Precondition(format!(
            "query width {} incompatible with key width {} and {n_heads} heads",
            query.len(),
            keys.dim()
        )));
    }
    let d_k = keys.dim() / n_heads;
    let scale = 1.0 / (d_k as f64).sqrt();
    let mut total = vec![0.0; keys.len()];
    let mut logits = vec![0.0; keys.len()];
    for h in 0..n_heads {
        let span = h * d_k..(h + 1) * d_k;
        for (l, k) in logits.iter_mut().zip(keys.iter()) {
            *l = query[span.clone()].iter().zip(&k[span.clone()]).map(|(a, b)| a * b).sum::<f64>() * scale;
        }
        softmax_in_place(&mut logits);
        for (t, p) in total.iter_mut().zip(&logits) {
            *t += p;
        }
    }
    Ok(total)
}

/// Attention scores of every entry of `cache` (injected entries included)
/// for a rotated query taken at `layer`.
pub fn attention_scores(query: &[f32], cache: &KvCache, layer: usize, n_heads: usize) -> Result<Vec<f64>> {
    if cache.is_empty() {
        return Err(CortexError::Precondition("attention scores need a non-empty cache".into()));
    }
    let all: Vec<usize> = (0..cache.len()).collect();
    let q: Vec<f64> = query.iter().map(|&v| v as f64).collect();
    density_scores(&q, &key_cloud(cache, layer, &all), n_heads)
}

/// Distance from each point to its nearest `selected` point. With nothing
/// selected, the distance to the cloud centroid.
pub fn coverage_distances(cloud: &PointCloud, selected: &[usize]) -> Vec<f64> {
    if selected.is_empty() {
        let c = cloud.centroid();
        return cloud.iter().map(|p| euclidean(p, &c)).collect();
    }
    cloud
        .iter()
        .map(|p| {
            selected
                .iter()
                .map(|&s| euclidean(p, cloud.point(s)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Coverage scores over the keys of every cache entry at `layer`.
/// `selected` holds cache indices.
pub fn coverage_scores(cache: &KvCache, selected: &[usize], layer: usize) -> Vec<f64> {
    let all: Vec<usize> = (0..cache.len()).collect();
    coverage_distances(&key_cloud(cache, layer, &all), selected)
}

/// Outcome of greedy hybrid selection over a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Picked point indices in pick order.
    pub order: Vec<usize>,
    /// Hybrid score of each pick at the round it was picked, aligned with `order`.
    pub scores: Vec<f64>,
}

impl Selection {
    /// (index, score) pairs sorted by index.
    pub fn sorted(&self) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> = self.order.iter().copied().zip(self.scores.iter().copied()).collect();
        v.sort_by_key(|(i, _)| *i);
        v
    }

    pub fn sorted_indices(&self) -> Vec<usize> {
        self.sorted().into_iter().map(|(i, _)| i).collect()
    }
}

pub(crate) fn validate_knobs(k: usize, lambda: f64) -> Result<()> {
    if k < 1 {
        return Err(CortexError::Config("k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CortexError::Config(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

fn min_max(values: &[f64], candidate: &[bool]) -> (f64, f64) {
    values
        .iter()
        .zip(candidate)
        .filter(|(_, c)| **c)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (v, _)| (lo.min(*v), hi.max(*v)))
}

fn rescale(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// Greedy hybrid selection of `min(k, n)` points. `density` is aligned with
/// the cloud's points. Ties go to the smaller index.
pub fn select_hybrid(cloud: &PointCloud, density: &[f64], k: usize, lambda: f64) -> Result<Selection> {
    validate_knobs(k, lambda)?;
    if density.len() != cloud.len() {
        return Err(CortexError::Precondition("density scores must align with the cloud".into()));
    }
    let n = cloud.len();
    let rounds = k.min(n);
    let mut candidate = vec![true; n];
    let mut nearest = coverage_distances(cloud, &[]);
    let mut order = Vec::with_capacity(rounds);
    let mut scores = Vec::with_capacity(rounds);

    for round in 0..rounds {
        let cov_range = min_max(&nearest, &candidate);
        let att_range = min_max(density, &candidate);
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| candidate[i]) {
            let score = lambda * rescale(nearest[i], cov_range) + (1.0 - lambda) * rescale(density[i], att_range);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        let (pick, score) = best.expect("a candidate remains while round < n");
        candidate[pick] = false;
        order.push(pick);
        scores.push(score);

        let anchor = cloud.point(pick);
        for (i, d) in nearest.iter_mut().enumerate() {
            let dist = euclidean(cloud.point(i), anchor);
            *d = if round == 0 { dist } else { d.min(dist) };
        }
    }
    Ok(Selection { order, scores })
}

/// Builds a landmark snapshot from the context entries of `cache`.
///
/// The point cloud is the keys of the final layer; `query` is the rotated
/// final-layer query of the most recent step. Landmark K/V is copied for
/// every layer. The snapshot's version is 0 until it is pushed.
pub fn select_landmarks(
    cache: &KvCache,
    query: &[f32],
    n_heads: usize,
    k: usize,
    lambda: f64,
) -> Result<SynapseSnapshot> {
    validate_knobs(k, lambda)?;
    let context = cache.context_indices();
    if context.is_empty() {
        return Err(CortexError::Precondition("cannot select landmarks from an empty cache".into()));
    }
    let layer = cache.n_layers() - 1;
    let attention = attention_scores(query, cache, layer, n_heads)?;
    let density: Vec<f64> = context.iter().map(|&i| attention[i]).collect();
    let cloud = key_cloud(cache, layer, &context);
    let selection = select_hybrid(&cloud, &density, k, lambda)?;

    let landmarks = selection
        .sorted()
        .into_iter()
        .map(|(local, hybrid_score)| {
            let index = context[local];
            let mut keys = Vec::with_capacity(cache.n_layers() * cache.d_model());
            let mut values = Vec::with_capacity(keys.capacity());
            for l in 0..cache.n_layers() {
                keys.extend_from_slice(cache.key(l, index));
                values.extend_from_slice(cache.value(l, index));
            }
            LandmarkEntry { source_position: cache.position(index), cache_index: index, keys, values, hybrid_score }
        })
        .collect();

    Ok(SynapseSnapshot {
        landmarks,
        version: 0,
        source_length: context.len(),
        next_position: cache.last_context_position().map_or(0, |p| p + 1),
        k_configured: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::new(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn coverage_examples() {
        let cloud = line(&[0.0, 1.0, 10.0]);
        assert_eq!(coverage_distances(&cloud, &[0]), vec![0.0, 1.0, 10.0]);
        assert_eq!(coverage_distances(&cloud, &[0, 1, 2]), vec![0.0; 3]);
        assert_eq!(coverage_distances(&cloud, &[1])[1], 0.0);
    }

    #[test]
    fn empty_selection_uses_centroid_distance() {
        // centroid 11/3
        let d = coverage_distances(&line(&[0.0, 1.0, 10.0]), &[]);
        assert!((d[2] - (10.0 - 11.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_query_gives_uniform_density() {
        let keys = PointCloud::from_rows(&[vec![0.0, 1.0], vec![0.0, -3.0], vec![0.0, 2.0]]).unwrap();
        let a = density_scores(&[1.0, 0.0], &keys, 1).unwrap();
        for v in a {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_point_density_matches_hand_value() {
        // softmax(1/sqrt(2), 0) evaluated to 30 digits:
        // e^(1/sqrt 2) / (e^(1/sqrt 2) + 1) = 0.669761549326656925616794945834
        let keys = PointCloud::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let a = density_scores(&[1.0, 0.0], &keys, 1).unwrap();
        assert!((a[0] - 0.669_761_549_326_656_9).abs() < 1e-15);
        assert!((a[1] - 0.330_238_450_673_343_1).abs() < 1e-15);
    }

    #[test]
    fn density_sums_to_head_count() {
        let keys = PointCloud::new(4, (0..40).map(|i| ((i * 7) % 11) as f64 - 5.0).collect()).unwrap();
        let a = density_scores(&[0.3, -1.0, 2.0, 0.5], &keys, 2).unwrap();
        assert!((a.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn saturation_returns_every_point() {
        let cloud = line(&[3.0, 1.0, 4.0, 1.0, 5.0]);
        let s = select_hybrid(&cloud, &[0.2; 5], 9, 0.5).unwrap();
        assert_eq!(s.sorted_indices(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn knobs_are_validated() {
        let cloud = line(&[0.0, 1.0]);
        assert!(matches!(select_hybrid(&cloud, &[0.0; 2], 0, 0.5), Err(CortexError::Config(_))));
        assert!(matches!(select_hybrid(&cloud, &[0.0; 2], 1, 1.5), Err(CortexError::Config(_))));
    }

    #[test]
    fn identical_points_break_ties_by_index() {
        let cloud = line(&[2.0; 6]);
        let s = select_hybrid(&cloud, &[0.5; 6], 3, 0.5).unwrap();
        assert_eq!(s.order, vec![0, 1, 2]);
    }
}
