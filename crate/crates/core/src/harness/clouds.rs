//! Seeded synthetic point clouds for the landmark benchmarks.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CortexError, Result};
use crate::synapse::{euclidean, hausdorff_distance, PointCloud};

/// Gaussian mixture with a cluster count drawn from `clusters` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    pub points: usize,
    pub dim: usize,
    pub clusters: (usize, usize),
    /// Standard deviation of the cluster centres.
    pub separation: f64,
    /// Standard deviation of points around their centre.
    pub spread: f64,
}

impl Default for CloudSpec {
    fn default() -> Self {
        Self { points: 256, dim: 8, clusters: (2, 8), separation: 6.0, spread: 1.0 }
    }
}

/// A mixture cloud plus each point's cluster label.
pub fn clustered_cloud<R: Rng>(spec: &CloudSpec, rng: &mut R) -> Result<(PointCloud, Vec<usize>)> {
    let (lo, hi) = spec.clusters;
    if spec.points == 0 || spec.dim == 0 || lo == 0 || lo > hi {
        return Err(CortexError::Config(format!("bad cloud spec {spec:?}")));
    }
    let centres_dist = Normal::new(0.0, spec.separation).map_err(|e| CortexError::Config(e.to_string()))?;
    let noise = Normal::new(0.0, spec.spread).map_err(|e| CortexError::Config(e.to_string()))?;
    let c = rng.random_range(lo..=hi);
    let centres: Vec<Vec<f64>> = (0..c).map(|_| (0..spec.dim).map(|_| centres_dist.sample(rng)).collect()).collect();
    let mut coords = Vec::with_capacity(spec.points * spec.dim);
    let mut labels = Vec::with_capacity(spec.points);
    for _ in 0..spec.points {
        let label = rng.random_range(0..c);
        labels.push(label);
        coords.extend(centres[label].iter().map(|m| m + noise.sample(rng)));
    }
    Ok((PointCloud::new(spec.dim, coords)?, labels))
}

/// Two tight, far-apart clusters of at least two points each, `n` points in
/// total, in the plane.
pub fn two_cluster_cloud<R: Rng>(n: usize, rng: &mut R) -> Result<(PointCloud, Vec<usize>)> {
    if n < 4 {
        return Err(CortexError::Config("two clusters need at least four points".into()));
    }
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    let left = rng.random_range(2..=n - 2);
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = usize::from(i >= left);
        let cx = if label == 0 { -20.0 } else { 20.0 };
        coords.push(cx + noise.sample(rng));
        coords.push(noise.sample(rng));
        labels.push(label);
    }
    Ok((PointCloud::new(2, coords)?, labels))
}

/// Every pair `(i, j)` with `i < j`; returns the pair with the smallest
/// directed Hausdorff distance (first found wins) and that distance.
pub fn optimal_pair(cloud: &PointCloud) -> Result<((usize, usize), f64)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let h = hausdorff_distance(cloud, &cloud.subset(&[i, j]))?;
            if best.is_none_or(|(_, b)| h < b) {
                best = Some(((i, j), h));
            }
        }
    }
    best.ok_or_else(|| CortexError::Precondition("need at least two points".into()))
}

/// Nearest-landmark assignment, as a sorted list of point groups.
pub fn voronoi_groups(cloud: &PointCloud, landmarks: &[usize]) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); landmarks.len()];
    for (i, p) in cloud.iter().enumerate() {
        let owner = landmarks
            .iter()
            .enumerate()
            .map(|(slot, &l)| (slot, euclidean(p, cloud.point(l))))
            .fold((0, f64::INFINITY), |acc, (s, d)| if d < acc.1 { (s, d) } else { acc });
        groups[owner.0].push(i);
    }
    groups.sort();
    groups
}

/// The points grouped by label, in the same sorted form as [`voronoi_groups`].
pub fn label_groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let n = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); n];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups.sort();
    groups
}
