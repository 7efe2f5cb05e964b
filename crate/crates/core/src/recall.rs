//! Denoising: bit-flipping inside a cluster and sequential peeling across
//! clusters.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::math::sign;
use crate::model::{ClusterLayout, SparseWeightMatrix};
use crate::{Error, Result};

/// Syndrome tolerance: a cluster is satisfied when `max_i |h_i| <= τ`.
#[derive(Debug, Clone, PartialEq)]
pub enum SatTolerance {
    Absolute(f64),
    /// `τ = factor · max row 1-norm of W`, per cluster.
    RowNormRelative(f64),
    /// One absolute tolerance per cluster, indexed by cluster id.
    PerCluster(Vec<f64>),
}

impl SatTolerance {
    /// Resolve the tolerance for the cluster that `w` belongs to.
    pub fn resolve(&self, w: &SparseWeightMatrix) -> f64 {
        match self {
            SatTolerance::Absolute(t) => *t,
            SatTolerance::RowNormRelative(f) => f * w.max_row_l1_norm(),
            SatTolerance::PerCluster(ts) => ts.get(w.cluster_id()).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecallConfig {
    /// Update threshold `φ` on the normalized feedback.
    pub phi: f64,
    /// Activation threshold `ψ` on the syndrome.
    pub psi: f64,
    pub t_max: usize,
    pub peel_rounds_max: usize,
    pub sat_tol: SatTolerance,
}

impl Default for RecallConfig {
    fn default() -> Self {
        Self::synthetic()
    }
}

impl RecallConfig {
    pub const DEFAULT_PSI: f64 = 0.005;

    /// `φ = 0.82`, `ψ = 0.005`, `τ = ψ`.
    pub fn synthetic() -> Self {
        Self {
            phi: 0.82,
            psi: Self::DEFAULT_PSI,
            t_max: 20,
            peel_rounds_max: 80,
            sat_tol: SatTolerance::Absolute(Self::DEFAULT_PSI),
        }
    }

    /// `φ = 0.85`; the tolerance is normally replaced by a calibrated
    /// [`SatTolerance::PerCluster`].
    pub fn image() -> Self {
        Self {
            phi: 0.85,
            ..Self::synthetic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi > 0.0 && self.phi <= 1.0) {
            return Err(invalid("phi must lie in (0, 1]"));
        }
        if !(self.psi >= 0.0) {
            return Err(invalid("psi must be nonnegative"));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max must be at least 1"));
        }
        let bad = match &self.sat_tol {
            SatTolerance::Absolute(t) | SatTolerance::RowNormRelative(t) => !(*t >= 0.0),
            SatTolerance::PerCluster(ts) => ts.iter().any(|t| !(*t >= 0.0)),
        };
        if bad {
            return Err(invalid("syndrome tolerance must be nonnegative"));
        }
        Ok(())
    }
}

/// Pattern neurons against super constraint nodes, one per cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedGraph {
    pub super_nodes: Vec<Vec<usize>>,
    pub neuron_edges: Vec<Vec<usize>>,
}

impl ContractedGraph {
    pub fn num_neurons(&self) -> usize {
        self.neuron_edges.len()
    }

    pub fn to_layout(&self) -> Result<ClusterLayout> {
        ClusterLayout::new(self.neuron_edges.len(), self.super_nodes.clone())
    }
}

pub fn build_contracted(layout: &ClusterLayout) -> ContractedGraph {
    ContractedGraph {
        super_nodes: layout.clusters().to_vec(),
        neuron_edges: layout.memberships().to_vec(),
    }
}

fn check_cols(w: &SparseWeightMatrix, len: usize) -> Result<()> {
    if w.cols() != len {
        return Err(Error::DimensionMismatch {
            expected: w.cols(),
            actual: len,
        });
    }
    Ok(())
}

fn syndrome_i64(w: &SparseWeightMatrix, x: &[i64]) -> Vec<f64> {
    let mut h = vec![0.0; w.rows()];
    for &(r, c, v) in w.entries() {
        h[r] += v * x[c] as f64;
    }
    h
}

fn max_abs(h: &[f64]) -> f64 {
    h.iter().fold(0.0, |a, &v| a.max(libm::fabs(v)))
}

/// `h = W x̂` and whether `max |h_i| <= tol`.
pub fn cluster_syndrome(w: &SparseWeightMatrix, x: &[u32], tol: f64) -> Result<(Vec<f64>, bool)> {
    check_cols(w, x.len())?;
    let xi: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let h = syndrome_i64(w, &xi);
    let sat = max_abs(&h) <= tol;
    Ok((h, sat))
}

/// Normalized feedback `g_j = Σ_i W_ij y_i / Σ_i |W_ij|` with
/// `y_i = sign(h_i)` when `|h_i| > ψ` and 0 otherwise. Empty columns get 0.
pub fn backward_feedback(w: &SparseWeightMatrix, h: &[f64], psi: f64) -> Result<Vec<f64>> {
    if h.len() != w.rows() {
        return Err(Error::DimensionMismatch {
            expected: w.rows(),
            actual: h.len(),
        });
    }
    let y: Vec<f64> = h
        .iter()
        .map(|&v| if libm::fabs(v) > psi { sign(v) } else { 0.0 })
        .collect();
    let num = w.transpose_mul_vec(&y)?;
    let den = w.column_abs_sums();
    Ok(num
        .iter()
        .zip(&den)
        .map(|(&a, &b)| if b > 0.0 { a / b } else { 0.0 })
        .collect())
}

/// Outcome of [`intra_correct`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntraOutcome {
    pub state: Vec<u32>,
    pub satisfied: bool,
    /// Update rounds that changed at least one neuron.
    pub iterations: usize,
}

/// Core bit-flipping loop on signed states. `max_value` clamps updates into
/// `[0, max_value]` when given.
pub(crate) fn correct_in_place(
    w: &SparseWeightMatrix,
    x: &mut [i64],
    config: &RecallConfig,
    tol: f64,
    max_value: Option<i64>,
) -> (bool, usize) {
    let den = w.column_abs_sums();
    let mut iterations = 0;
    for _ in 0..config.t_max {
        let h = syndrome_i64(w, x);
        if max_abs(&h) <= tol {
            return (true, iterations);
        }
        let mut num = vec![0.0; w.cols()];
        for &(r, c, v) in w.entries() {
            let hr = h[r];
            if libm::fabs(hr) > config.psi {
                num[c] += v * sign(hr);
            }
        }
        let mut changed = false;
        for j in 0..x.len() {
            if den[j] == 0.0 {
                continue;
            }
            let g = num[j] / den[j];
            if libm::fabs(g) > config.phi {
                let mut next = x[j] - sign(g) as i64;
                if let Some(max) = max_value {
                    next = next.clamp(0, max);
                }
                if next != x[j] {
                    x[j] = next;
                    changed = true;
                }
            }
        }
        if !changed {
            // a round without updates leaves the state, and so every later
            // round, unchanged
            break;
        }
        iterations += 1;
    }
    let sat = max_abs(&syndrome_i64(w, x)) <= tol;
    (sat, iterations)
}

/// Bit-flipping decoder for one cluster. States are clamped to
/// `[0, alphabet_size - 1]`.
pub fn intra_correct(
    w: &SparseWeightMatrix,
    x: &[u32],
    config: &RecallConfig,
    alphabet_size: u32,
) -> Result<IntraOutcome> {
    config.validate()?;
    check_cols(w, x.len())?;
    if alphabet_size < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    let mut state: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let tol = config.sat_tol.resolve(w);
    let (satisfied, iterations) = correct_in_place(w, &mut state, config, tol, Some(alphabet_size as i64 - 1));
    Ok(IntraOutcome {
        state: state.into_iter().map(|v| v as u32).collect(),
        satisfied,
        iterations,
    })
}

/// One cluster visit during peeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelEvent {
    /// 1-based round number.
    pub round: usize,
    pub cluster: usize,
    /// False when the cluster was already satisfied and skipped.
    pub attempted: bool,
    pub succeeded: bool,
    /// Global indices of neurons whose committed state changed.
    pub changed_neurons: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeelOutcome {
    pub state: Vec<u32>,
    pub success: bool,
    pub rounds: usize,
    /// Number of `intra_correct` calls.
    pub attempts: usize,
    pub log: Vec<PeelEvent>,
}

fn check_network(weights: &[SparseWeightMatrix], layout: &ClusterLayout, n: usize) -> Result<()> {
    if n != layout.n() {
        return Err(Error::DimensionMismatch {
            expected: layout.n(),
            actual: n,
        });
    }
    if weights.len() != layout.num_clusters() {
        return Err(Error::DimensionMismatch {
            expected: layout.num_clusters(),
            actual: weights.len(),
        });
    }
    for (c, w) in weights.iter().enumerate() {
        check_cols(w, layout.clusters()[c].len())?;
    }
    Ok(())
}

/// Clusters whose syndrome exceeds their tolerance.
pub fn unsatisfied_clusters(
    weights: &[SparseWeightMatrix],
    layout: &ClusterLayout,
    x: &[u32],
    config: &RecallConfig,
) -> Result<Vec<usize>> {
    check_network(weights, layout, x.len())?;
    Ok(weights
        .iter()
        .enumerate()
        .filter(|(c, w)| {
            let sub: Vec<i64> = layout.clusters()[*c].iter().map(|&i| x[i] as i64).collect();
            max_abs(&syndrome_i64(w, &sub)) > config.sat_tol.resolve(w)
        })
        .map(|(c, _)| c)
        .collect())
}

/// Sequential peeling over the contracted graph.
///
/// Clusters are visited round-robin. An unsatisfied cluster runs
/// [`intra_correct`] on its current sub-pattern; success commits the new
/// states, failure reverts the cluster's neurons to their values at the start
/// of that attempt. Stops when every cluster is satisfied, after
/// `peel_rounds_max` rounds, or after a round that committed nothing (the
/// next round would repeat it exactly).
pub fn peel(
    weights: &[SparseWeightMatrix],
    layout: &ClusterLayout,
    x: &[u32],
    config: &RecallConfig,
    alphabet_size: u32,
) -> Result<PeelOutcome> {
    config.validate()?;
    check_network(weights, layout, x.len())?;
    if alphabet_size < 2 {
        return Err(invalid("alphabet size must be at least 2"));
    }
    let max_value = Some(alphabet_size as i64 - 1);
    let tols: Vec<f64> = weights.iter().map(|w| config.sat_tol.resolve(w)).collect();
    let mut state: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let sub_of = |state: &[i64], c: usize| -> Vec<i64> { layout.clusters()[c].iter().map(|&i| state[i]).collect() };
    let satisfied = |state: &[i64], c: usize| max_abs(&syndrome_i64(&weights[c], &sub_of(state, c))) <= tols[c];

    let mut log = Vec::new();
    let mut rounds = 0;
    let mut attempts = 0;
    let mut all_ok = (0..weights.len()).all(|c| satisfied(&state, c));
    while !all_ok && rounds < config.peel_rounds_max {
        rounds += 1;
        let mut committed = false;
        for c in 0..weights.len() {
            if satisfied(&state, c) {
                log.push(PeelEvent {
                    round: rounds,
                    cluster: c,
                    attempted: false,
                    succeeded: false,
                    changed_neurons: Vec::new(),
                });
                continue;
            }
            attempts += 1;
            let mut sub = sub_of(&state, c);
            let (ok, _) = correct_in_place(&weights[c], &mut sub, config, tols[c], max_value);
            let mut changed = Vec::new();
            if ok {
                for (k, &i) in layout.clusters()[c].iter().enumerate() {
                    if state[i] != sub[k] {
                        state[i] = sub[k];
                        changed.push(i);
                    }
                }
                committed |= !changed.is_empty();
            }
            log.push(PeelEvent {
                round: rounds,
                cluster: c,
                attempted: true,
                succeeded: ok,
                changed_neurons: changed,
            });
        }
        all_ok = (0..weights.len()).all(|c| satisfied(&state, c));
        if !committed {
            break;
        }
    }

    Ok(PeelOutcome {
        state: state.into_iter().map(|v| v as u32).collect(),
        success: all_ok,
        rounds,
        attempts,
        log,
    })
}
