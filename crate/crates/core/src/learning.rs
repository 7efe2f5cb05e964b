//! Sparse null-space learning.
//!
//! Each constraint vector `w` of a cluster is learned by stochastic descent on
//! `Σ_x ⟨x, w⟩² + η g(w)` under a norm constraint, where `g` is a smooth
//! surrogate of the number of nonzero entries. One step, for a pattern `x`
//! drawn uniformly from the training set, is
//!
//! ```text
//! y  = ⟨x, w⟩
//! w' = w - α_t ( y (x - y w / ‖w‖²) + η Γ(w, θ_t) )
//! ```
//!
//! with `Γ` the soft threshold that keeps entries with `|w_i| <= θ_t` and
//! zeroes the rest, so only small entries are pulled toward zero. Keeping
//! `α_t η < 1` guarantees the iterate never collapses to the zero vector.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::invalid;
use crate::linalg::real_rank;
use crate::math::{dot, norm, tanh};
use crate::model::{ClusterLayout, Dataset, SparseWeightMatrix};
use crate::{rng, Error, Result};

/// How the sparsity weight `η` evolves with the step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaPolicy {
    /// Constant `η`; requires `α_0 c η < 1`.
    Fixed(f64),
    /// `η_t = κ / α_t`, so that `α_t η_t = κ` at every epoch; requires `κ < 1`.
    Coupled { kappa: f64 },
}

/// Which gradient of the sparsity penalty drives the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SparsityGradient {
    /// Soft threshold `Γ(w, θ_t)`.
    #[default]
    SoftThreshold,
    /// Exact gradient of `Σ tanh(σ w_i²)`.
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningConfig {
    /// Base step size. `None` scales it to the data: `1 / max ‖x‖²` over the
    /// cluster's sub-patterns.
    pub alpha0: Option<f64>,
    /// `α_t = α_0 · decay / t`, `t` counting epochs from 1.
    pub decay: f64,
    pub eta: EtaPolicy,
    /// `θ_t = theta0 / t`.
    pub theta0: f64,
    pub sigma: f64,
    pub gradient: SparsityGradient,
    /// Stop once the mean squared projection of the normalized `w` drops to
    /// this value.
    pub epsilon_stop: f64,
    pub max_epochs: usize,
    /// Entries with `|w_i| <= zero_epsilon · max_j |w_j|` are dropped from
    /// the final vector.
    pub zero_epsilon: f64,
    pub seed: u64,
    /// Keep constraints that never reached `epsilon_stop` (approximate
    /// subspaces such as natural images).
    pub accept_unconverged: bool,
}

impl Default for LearningConfig {
    fn default() -> Self {
        Self::synthetic()
    }
}

impl LearningConfig {
    /// Defaults for exact-subspace data.
    pub fn synthetic() -> Self {
        Self {
            alpha0: None,
            decay: 0.95,
            eta: EtaPolicy::Coupled { kappa: 0.75 },
            theta0: 0.05,
            sigma: 100.0,
            gradient: SparsityGradient::SoftThreshold,
            epsilon_stop: 1e-6,
            max_epochs: 10,
            zero_epsilon: 1e-4,
            seed: 0,
            accept_unconverged: false,
        }
    }

    /// Defaults for binary-expanded images: fixed `η = 1`, `θ_t = 0.01/t`
    /// and a 1000-epoch cap.
    pub fn image() -> Self {
        Self {
            eta: EtaPolicy::Fixed(1.0),
            theta0: 0.01,
            max_epochs: 1000,
            accept_unconverged: true,
            ..Self::synthetic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha0 {
            if !(a > 0.0) {
                return Err(invalid("alpha0 must be positive"));
            }
        }
        if !(self.decay > 0.0) || !(self.theta0 >= 0.0) || !(self.sigma > 0.0) {
            return Err(invalid("decay and sigma must be positive, theta0 nonnegative"));
        }
        if self.max_epochs == 0 {
            return Err(invalid("max_epochs must be at least 1"));
        }
        match self.eta {
            EtaPolicy::Coupled { kappa } if !(0.0..1.0).contains(&kappa) => {
                Err(invalid("coupled policy needs 0 <= kappa < 1"))
            }
            EtaPolicy::Fixed(eta) if !(eta >= 0.0) => Err(invalid("eta must be nonnegative")),
            _ => Ok(()),
        }
    }

    pub fn alpha(&self, alpha0: f64, epoch: usize) -> f64 {
        alpha0 * self.decay / epoch as f64
    }

    pub fn eta_at(&self, alpha: f64) -> f64 {
        match self.eta {
            EtaPolicy::Fixed(eta) => eta,
            EtaPolicy::Coupled { kappa } => kappa / alpha,
        }
    }

    pub fn theta(&self, epoch: usize) -> f64 {
        self.theta0 / epoch as f64
    }
}

/// `⟨x, w⟩`.
pub fn project(x: &[f64], w: &[f64]) -> Result<f64> {
    if x.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: w.len(),
            actual: x.len(),
        });
    }
    Ok(dot(x, w))
}

/// `Σ_i tanh(σ w_i²)`.
pub fn penalty(w: &[f64], sigma: f64) -> f64 {
    w.iter().map(|&v| tanh(sigma * v * v)).sum()
}

/// Componentwise `2σ w_i (1 - tanh²(σ w_i²))`.
pub fn penalty_gradient_exact(w: &[f64], sigma: f64) -> Vec<f64> {
    w.iter()
        .map(|&v| {
            let t = tanh(sigma * v * v);
            2.0 * sigma * v * (1.0 - t * t)
        })
        .collect()
}

/// Keep entries with `|z_i| <= θ`, zero the rest.
pub fn soft_threshold(z: &[f64], theta: f64) -> Vec<f64> {
    z.iter()
        .map(|&v| if libm::fabs(v) <= theta { v } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Sparsity {
    Threshold(f64),
    Tanh(f64),
}

fn step_in_place(w: &mut [f64], x: &[f64], alpha: f64, eta: f64, sparsity: Sparsity) -> Result<()> {
    let y = project(x, w)?;
    let norm_sq = dot(w, w);
    if norm_sq == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let shrink = y / norm_sq;
    for i in 0..w.len() {
        let wi = w[i];
        let gamma = match sparsity {
            Sparsity::Threshold(theta) => {
                if libm::fabs(wi) <= theta {
                    wi
                } else {
                    0.0
                }
            }
            Sparsity::Tanh(sigma) => {
                let t = tanh(sigma * wi * wi);
                2.0 * sigma * wi * (1.0 - t * t)
            }
        };
        w[i] = wi - alpha * (y * (x[i] - shrink * wi) + eta * gamma);
    }
    Ok(())
}

/// One learning step with the soft-threshold sparsity term. The result is
/// not renormalized.
pub fn learn_step(w: &[f64], x: &[f64], alpha: f64, eta: f64, theta: f64) -> Result<Vec<f64>> {
    let mut out = w.to_vec();
    step_in_place(&mut out, x, alpha, eta, Sparsity::Threshold(theta))?;
    Ok(out)
}

/// Mean squared projection `(1/C) Σ ⟨w, x⟩²` over the sub-patterns of
/// `cluster`.
pub fn cost(w: &[f64], dataset: &Dataset, layout: &ClusterLayout, cluster: usize) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let idx = layout.cluster(cluster)?;
    if w.len() != idx.len() {
        return Err(Error::DimensionMismatch {
            expected: idx.len(),
            actual: w.len(),
        });
    }
    let total: f64 = dataset
        .patterns()
        .map(|p| {
            let y: f64 = idx.iter().zip(w).map(|(&i, &wi)| p[i] as f64 * wi).sum();
            y * y
        })
        .sum();
    Ok(total / dataset.len() as f64)
}

fn cost_of(w: &[f64], subpatterns: &[Vec<f64>]) -> f64 {
    subpatterns.iter().map(|x| { let y = dot(x, w); y * y }).sum::<f64>() / subpatterns.len() as f64
}

/// Largest `|⟨w, x⟩| / (‖w‖ ‖x‖)` over the nonzero sub-patterns.
pub fn max_normalized_projection(w: &[f64], subpatterns: &[Vec<f64>]) -> f64 {
    let wn = norm(w);
    subpatterns
        .iter()
        .filter_map(|x| {
            let xn = norm(x);
            (xn > 0.0 && wn > 0.0).then(|| libm::fabs(dot(x, w)) / (wn * xn))
        })
        .fold(0.0, f64::max)
}

/// Outcome of learning one constraint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintFit {
    /// Unit-norm, sparsified, sign-canonical constraint.
    pub weights: Vec<f64>,
    /// Unit-norm iterate before sparsification.
    pub raw: Vec<f64>,
    /// Cost of the normalized iterate, entry 0 at initialization then one per
    /// epoch.
    pub trace: Vec<f64>,
    pub converged: bool,
    pub epochs: usize,
    /// Smallest `‖w‖` seen across all steps.
    pub min_norm: f64,
}

fn default_alpha0(subpatterns: &[Vec<f64>]) -> f64 {
    let max_sq = subpatterns.iter().map(|x| dot(x, x)).fold(0.0, f64::max);
    if max_sq > 0.0 {
        1.0 / max_sq
    } else {
        1.0
    }
}

fn normalized(w: &[f64]) -> Vec<f64> {
    let n = norm(w);
    w.iter().map(|v| v / n).collect()
}

/// Drop tiny entries and flip the sign so the largest-magnitude entry is
/// positive.
fn finalize(w: &[f64], zero_epsilon: f64) -> Vec<f64> {
    let (arg, peak) = w
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &v)| if libm::fabs(v) > acc.1 { (i, libm::fabs(v)) } else { acc });
    let cutoff = zero_epsilon * peak;
    let sign = if w.get(arg).copied().unwrap_or(0.0) < 0.0 { -1.0 } else { 1.0 };
    let kept: Vec<f64> = w
        .iter()
        .map(|&v| if libm::fabs(v) <= cutoff { 0.0 } else { sign * v })
        .collect();
    let n = norm(&kept);
    if n > 0.0 {
        kept.iter().map(|v| v / n).collect()
    } else {
        kept
    }
}

pub(crate) fn learn_on(subpatterns: &[Vec<f64>], dim: usize, config: &LearningConfig) -> Result<ConstraintFit> {
    config.validate()?;
    if subpatterns.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = rng::from_seed(config.seed);
    let mut w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    while norm(&w) == 0.0 {
        w.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    }
    w = normalized(&w);

    let alpha0 = config.alpha0.unwrap_or_else(|| default_alpha0(subpatterns));
    let c = subpatterns.len();
    let mut trace = vec![cost_of(&w, subpatterns)];
    let mut best = (trace[0], w.clone());
    let mut min_norm = 1.0f64;
    let mut converged = trace[0] <= config.epsilon_stop;
    let mut epochs = 0;

    while !converged && epochs < config.max_epochs {
        epochs += 1;
        let alpha = config.alpha(alpha0, epochs);
        let eta = config.eta_at(alpha);
        let sparsity = match config.gradient {
            SparsityGradient::SoftThreshold => Sparsity::Threshold(config.theta(epochs)),
            SparsityGradient::Tanh => Sparsity::Tanh(config.sigma),
        };
        for _ in 0..c {
            let x = &subpatterns[rng.gen_range(0..c)];
            step_in_place(&mut w, x, alpha, eta, sparsity)?;
            let n = norm(&w);
            min_norm = min_norm.min(n);
            if n == 0.0 {
                return Err(Error::ZeroNorm);
            }
            // numeric drift guard; the update itself never renormalizes
            if !(0.1..=10.0).contains(&n) {
                w.iter_mut().for_each(|v| *v /= n);
            }
        }
        let unit = normalized(&w);
        let e = cost_of(&unit, subpatterns);
        trace.push(e);
        if e < best.0 {
            best = (e, unit);
        }
        converged = e <= config.epsilon_stop;
    }

    let raw = if converged { normalized(&w) } else { best.1 };
    Ok(ConstraintFit {
        weights: finalize(&raw, config.zero_epsilon),
        raw,
        trace,
        converged,
        epochs,
        min_norm,
    })
}

/// Learn one constraint vector for `cluster`.
pub fn learn_constraint(
    dataset: &Dataset,
    layout: &ClusterLayout,
    cluster: usize,
    config: &LearningConfig,
) -> Result<ConstraintFit> {
    let subpatterns = dataset.subpatterns_f64(layout, cluster)?;
    learn_on(&subpatterns, layout.cluster(cluster)?.len(), config)
}

/// All constraints of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFit {
    pub weights: SparseWeightMatrix,
    /// Accepted fits, in row order.
    pub fits: Vec<ConstraintFit>,
    pub attempts: usize,
}

/// Relative pivot tolerance for the independence check.
pub const INDEPENDENCE_TOL: f64 = 1e-8;

/// Learn `m` linearly independent constraints for `cluster`.
///
/// Runs [`learn_constraint`] from independent derived seeds and keeps a
/// result only if it converged (unless `accept_unconverged`) and raises the
/// rank of the rows accepted so far. Gives up after `10m + 10` attempts.
pub fn learn_cluster(
    dataset: &Dataset,
    layout: &ClusterLayout,
    cluster: usize,
    m: usize,
    config: &LearningConfig,
) -> Result<ClusterFit> {
    let subpatterns = dataset.subpatterns_f64(layout, cluster)?;
    let dim = layout.cluster(cluster)?.len();
    if m > dim {
        return Err(invalid("cannot learn more constraints than the cluster has neurons"));
    }
    if m == 0 {
        return Ok(ClusterFit {
            weights: SparseWeightMatrix::empty(cluster, dim),
            fits: Vec::new(),
            attempts: 0,
        });
    }

    let budget = 10 * m + 10;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut fits = Vec::with_capacity(m);
    let mut attempts = 0;
    while rows.len() < m {
        if attempts == budget {
            return Err(Error::RetriesExhausted {
                attempts,
                reason: alloc::format!(
                    "cluster {cluster}: found {} of {m} independent constraints",
                    rows.len()
                ),
            });
        }
        let cfg = LearningConfig {
            seed: rng::derive(config.seed, &[cluster as u64, attempts as u64]),
            ..config.clone()
        };
        attempts += 1;
        let fit = learn_on(&subpatterns, dim, &cfg)?;
        if !fit.converged && !config.accept_unconverged {
            continue;
        }
        rows.push(fit.weights.clone());
        if real_rank(&rows, INDEPENDENCE_TOL) < rows.len() {
            rows.pop();
            continue;
        }
        fits.push(fit);
    }

    let cutoff = rows
        .iter()
        .map(|r| config.zero_epsilon * r.iter().fold(0.0f64, |a, &v| a.max(libm::fabs(v))))
        .fold(f64::INFINITY, f64::min);
    let weights = SparseWeightMatrix::from_dense_rows(cluster, dim, &rows, cutoff)?;
    Ok(ClusterFit {
        weights,
        fits,
        attempts,
    })
}

/// `n_ℓ - rank` of the sub-pattern matrix of `cluster`: the number of
/// independent constraints that exist.
pub fn null_space_dimension(dataset: &Dataset, layout: &ClusterLayout, cluster: usize) -> Result<usize> {
    let idx = layout.cluster(cluster)?;
    let sub: Vec<u32> = dataset
        .patterns()
        .flat_map(|p| idx.iter().map(move |&i| p[i]))
        .collect();
    let rank = crate::exact::integer_rank_u32(&sub, idx.len())?;
    Ok(idx.len() - rank)
}

/// Finite-difference helper used by tests and diagnostics: central
/// difference of [`penalty`] along coordinate `i`.
pub fn penalty_central_difference(w: &[f64], sigma: f64, i: usize, h: f64) -> f64 {
    let mut plus = w.to_vec();
    let mut minus = w.to_vec();
    plus[i] += h;
    minus[i] -= h;
    (penalty(&plus, sigma) - penalty(&minus, sigma)) / (2.0 * h)
}
