use crate::error::{CortexError, Result};

/// Dense point set in R^dim, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() % dim != 0 {
            return Err(CortexError::Precondition(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.as_ref().len());
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.as_ref().len() != dim {
                return Err(CortexError::Precondition("ragged point rows".into()));
            }
            coords.extend_from_slice(r.as_ref());
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
        let n = self.len().max(1) as f64;
        c.iter_mut().for_each(|v| *v /= n);
        c
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Directed Hausdorff distance from `cloud` to `landmarks`: the largest
/// distance from any cloud point to its nearest landmark.
pub fn hausdorff_distance(cloud: &PointCloud, landmarks: &PointCloud) -> Result<f64> {
    if cloud.is_empty() || landmarks.is_empty() {
        return Err(CortexError::Precondition("hausdorff distance needs two non-empty sets".into()));
    }
    if cloud.dim() != landmarks.dim() {
        return Err(CortexError::Precondition("point dimensions differ".into()));
    }
    let worst = cloud
        .iter()
        .map(|p| landmarks.iter().map(|l| euclidean(p, l)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Mean distance over all unordered pairs; 0 for fewer than two points.
pub fn mean_pairwise_distance(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += euclidean(cloud.point(i), cloud.point(j));
        }
    }
    total / (n * (n - 1) / 2) as f64
}

/// `1 - mean_pairwise(landmarks) / mean_pairwise(cloud)`.
///
/// Negative when landmarks are more spread out than the cloud. A cloud whose
/// mean pairwise distance is zero yields 0.
pub fn mean_pairwise_reduction(cloud: &PointCloud, landmarks: &PointCloud) -> Result<f64> {
    if landmarks.len() < 2 || cloud.len() < 2 {
        return Err(CortexError::Precondition(
            "mean pairwise reduction needs at least two points in each set".into(),
        ));
    }
    let base = mean_pairwise_distance(cloud);
    if base == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - mean_pairwise_distance(landmarks) / base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::new(1, xs.to_vec()).unwrap()
    }

    #[test]
    fn hausdorff_examples() {
        let cloud = line(&[0.0, 10.0]);
        assert_eq!(hausdorff_distance(&cloud, &cloud).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&cloud, &line(&[0.0])).unwrap(), 10.0);
        assert!(hausdorff_distance(&cloud, &line(&[])).is_err());
    }

    #[test]
    fn mean_pairwise_examples() {
        let cloud = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(mean_pairwise_reduction(&cloud, &cloud).unwrap(), 0.0);
        // Pairs of {0,1,2,3}: 1,2,3,1,2,1 -> mean 10/6. Landmarks {1,2}: mean 1.
        let r = mean_pairwise_reduction(&cloud, &line(&[1.0, 2.0])).unwrap();
        assert!((r - (1.0 - 6.0 / 10.0)).abs() < 1e-12);
        assert!(mean_pairwise_reduction(&cloud, &line(&[1.0])).is_err());
        let flat = line(&[4.0; 5]);
        assert_eq!(mean_pairwise_reduction(&flat, &line(&[4.0, 4.0])).unwrap(), 0.0);
    }
}
