//! Landmark-compressed view of the main agent's KV cache.
//!
//! The main agent's cache is treated as a point cloud of final-layer keys.
//! Landmarks are chosen by a hybrid of attention density and farthest-point
//! coverage, copied into an immutable snapshot, and published through a
//! single-writer slot that side agents read.

mod buffer;
mod cloud;
mod select;
mod snapshot;

pub use buffer::{synapse_channel, SynapseReader, SynapseWriter};
pub use cloud::{euclidean, hausdorff_distance, mean_pairwise_distance, mean_pairwise_reduction, PointCloud};
pub use select::{
    attention_scores, coverage_distances, coverage_scores, density_scores, key_cloud, select_hybrid,
    select_landmarks, Selection, DEFAULT_K, DEFAULT_LAMBDA,
};
pub use snapshot::{LandmarkEntry, SnapshotDump, SynapseSnapshot};
