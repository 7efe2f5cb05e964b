//! Core domain types: patterns, datasets, cluster layouts, sparse constraint
//! matrices, the additive noise model and degree distributions.

mod dataset;
mod degrees;
mod layout;
mod noise;
mod weights;

pub use dataset::{extract_subpattern, Dataset};
pub use degrees::{
    edge_degree_distributions, node_degree_distribution, DegreeDistributions, EdgeDegrees,
    NodeDegrees,
};
pub use layout::{random_cluster_layout, ClusterLayout};
pub use noise::{apply_noise, NoiseSpec};
pub use weights::SparseWeightMatrix;
