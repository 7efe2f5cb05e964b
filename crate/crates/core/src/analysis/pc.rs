use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng as _;

use super::poly_eval;
use crate::error::invalid;
use crate::math::{powi, sqrt};
use crate::model::SparseWeightMatrix;
use crate::recall::{correct_in_place, RecallConfig};
use crate::{rng, Result};

/// `(1 - Λ(d̄/m))^(n_ℓ - 1)`, a lower bound on the probability that one
/// cluster corrects a single error. `node_lambda[i]` is the fraction of
/// pattern neurons of degree `i`.
pub fn pc_lower_bound(node_lambda: &[f64], mean_degree: f64, m: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("cluster must have at least one neuron"));
    }
    if m == 0 || !(mean_degree >= 0.0) || mean_degree > m as f64 {
        return Err(invalid("mean degree must lie in [0, m] with m >= 1"));
    }
    let base = 1.0 - poly_eval(node_lambda, mean_degree / m as f64);
    Ok(powi(base.max(0.0), n - 1))
}

/// Empirical single-error correction rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcEstimate {
    pub rate: f64,
    pub std_error: f64,
    /// `1.96 · std_error`.
    pub half_width: f64,
    pub trials: usize,
}

/// Fraction of trials in which one `intra_correct` call removes a single
/// `±1` error at a uniform position.
///
/// The clean pattern is the zero vector, which lies in every null space, and
/// states are not clamped, so the estimate does not depend on the alphabet.
pub fn pc_monte_carlo(w: &SparseWeightMatrix, config: &RecallConfig, trials: usize, seed: u64) -> Result<PcEstimate> {
    config.validate()?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if w.cols() == 0 {
        return Err(invalid("cluster has no neurons"));
    }
    let tol = config.sat_tol.resolve(w);
    let mut rng = rng::from_seed(seed);
    let mut ok = 0usize;
    let mut x = vec![0i64; w.cols()];
    for _ in 0..trials {
        x.iter_mut().for_each(|v| *v = 0);
        let j = rng.gen_range(0..w.cols());
        x[j] = if rng.gen_bool(0.5) { 1 } else { -1 };
        correct_in_place(w, &mut x, config, tol, None);
        if x.iter().all(|&v| v == 0) {
            ok += 1;
        }
    }
    let rate = ok as f64 / trials as f64;
    let std_error = sqrt(rate * (1.0 - rate) / trials as f64);
    Ok(PcEstimate {
        rate,
        std_error,
        half_width: 1.96 * std_error,
        trials,
    })
}

/// Parameters for [`random_cluster_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSampler {
    pub rows: usize,
    pub cols: usize,
    /// `node_lambda[i]`: probability that a column has degree `i`.
    pub node_lambda: Vec<f64>,
    /// Nonzero magnitudes are uniform on `[min_weight, max_weight]` with a
    /// random sign.
    pub min_weight: f64,
    pub max_weight: f64,
}

/// Random constraint matrix whose column degrees are drawn from
/// `node_lambda` and whose supports are uniform subsets of the rows.
pub fn random_cluster_weights(spec: &ClusterSampler, cluster_id: usize, seed: u64) -> Result<SparseWeightMatrix> {
    let total: f64 = spec.node_lambda.iter().sum();
    if spec.node_lambda.iter().any(|&p| !(p >= 0.0)) || !(libm::fabs(total - 1.0) <= 1e-9) {
        return Err(invalid("degree distribution must be nonnegative and sum to 1"));
    }
    if spec.node_lambda.len() > spec.rows + 1 && spec.node_lambda[spec.rows + 1..].iter().any(|&p| p > 0.0) {
        return Err(invalid("column degree cannot exceed the number of rows"));
    }
    if !(spec.min_weight > 0.0 && spec.min_weight <= spec.max_weight) {
        return Err(invalid("weight range must satisfy 0 < min <= max"));
    }
    let mut rng = rng::from_seed(seed);
    let mut entries = Vec::new();
    for c in 0..spec.cols {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut degree = spec.node_lambda.len() - 1;
        for (d, &p) in spec.node_lambda.iter().enumerate() {
            acc += p;
            if u < acc {
                degree = d;
                break;
            }
        }
        for r in sample(&mut rng, spec.rows, degree.min(spec.rows)) {
            let mag = rng.gen_range(spec.min_weight..=spec.max_weight);
            let v = if rng.gen_bool(0.5) { mag } else { -mag };
            entries.push((r, c, v));
        }
    }
    SparseWeightMatrix::new(cluster_id, spec.rows, spec.cols, entries, 0.0)
}

/// Whether no two columns have the same set of nonzero rows.
pub fn has_distinct_supports(w: &SparseWeightMatrix) -> bool {
    let mut supports: Vec<Vec<usize>> = vec![Vec::new(); w.cols()];
    for &(r, c, _) in w.entries() {
        supports[c].push(r);
    }
    supports.iter_mut().for_each(|s| s.sort_unstable());
    supports.sort();
    supports.windows(2).all(|p| p[0] != p[1])
}
