//! Performance prediction: the single-error correction bound, density
//! evolution over the contracted graph, and the dataset eigen-spectrum.

mod de;
mod pc;
mod spectrum;

pub use de::{de_limit, de_step, de_threshold, de_trajectory, DEParams, DE_SUCCESS_LEVEL};
pub use pc::{
    has_distinct_supports, pc_lower_bound, pc_monte_carlo, random_cluster_weights, ClusterSampler,
    PcEstimate,
};
pub use spectrum::{correlation_matrix, eigen_spectrum, eigen_spectrum_unclamped};

/// Horner evaluation of `Σ_k coeffs[k] z^k`.
pub(crate) fn poly_eval(coeffs: &[f64], z: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}
