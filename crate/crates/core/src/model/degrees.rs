use alloc::vec;
use alloc::vec::Vec;

use super::{ClusterLayout, SparseWeightMatrix};
use crate::{Error, Result};

/// Node-perspective degree distribution of the pattern neurons of one
/// cluster: `lambda[i]` is the fraction of columns with exactly `i` stored
/// entries.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeDegrees {
    pub lambda: Vec<f64>,
    pub mean_degree: f64,
}

impl NodeDegrees {
    /// `Λ(x) = Σ_i Λ_i x^i`.
    pub fn eval(&self, x: f64) -> f64 {
        self.lambda.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Edge-perspective degree distributions of the contracted graph, indexed by
/// degree: `lambda[i]` is the fraction of membership edges touching neurons
/// that belong to `i` clusters, `rho[j]` the fraction touching clusters of
/// size `j`. Index 0 is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDegrees {
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
}

impl EdgeDegrees {
    /// Coefficients of `λ̃(z) = Σ_i λ̃_i z^(i-1)`, by power of `z`.
    pub fn lambda_poly(&self) -> Vec<f64> {
        self.lambda.iter().skip(1).copied().collect()
    }

    /// Coefficients of `ρ̃(z) = Σ_j ρ̃_j z^(j-1)`, by power of `z`.
    pub fn rho_poly(&self) -> Vec<f64> {
        self.rho.iter().skip(1).copied().collect()
    }
}

/// Per-cluster node distributions together with the contracted-graph edge
/// distributions of a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistributions {
    pub node: Vec<NodeDegrees>,
    pub edge: EdgeDegrees,
}

impl DegreeDistributions {
    pub fn from_network(weights: &[SparseWeightMatrix], layout: &ClusterLayout) -> Result<Self> {
        if weights.len() != layout.num_clusters() {
            return Err(Error::DimensionMismatch {
                expected: layout.num_clusters(),
                actual: weights.len(),
            });
        }
        Ok(Self {
            node: weights.iter().map(node_degree_distribution).collect(),
            edge: edge_degree_distributions(layout),
        })
    }
}

pub fn node_degree_distribution(w: &SparseWeightMatrix) -> NodeDegrees {
    let degrees = w.column_degrees();
    let cols = degrees.len().max(1) as f64;
    let max_deg = degrees.iter().copied().max().unwrap_or(0);
    let mut lambda = vec![0.0; max_deg + 1];
    for &d in &degrees {
        lambda[d] += 1.0;
    }
    lambda.iter_mut().for_each(|v| *v /= cols);
    let mean_degree = degrees.iter().sum::<usize>() as f64 / cols;
    NodeDegrees { lambda, mean_degree }
}

pub fn edge_degree_distributions(layout: &ClusterLayout) -> EdgeDegrees {
    let edges: usize = layout.clusters().iter().map(Vec::len).sum();
    let total = edges as f64;

    let max_member = layout.memberships().iter().map(Vec::len).max().unwrap_or(0);
    let mut lambda = vec![0.0; max_member + 1];
    for m in layout.memberships() {
        // a neuron of degree d contributes d edges
        lambda[m.len()] += m.len() as f64;
    }

    let max_size = layout.clusters().iter().map(Vec::len).max().unwrap_or(0);
    let mut rho = vec![0.0; max_size + 1];
    for c in layout.clusters() {
        rho[c.len()] += c.len() as f64;
    }

    lambda.iter_mut().for_each(|v| *v /= total);
    rho.iter_mut().for_each(|v| *v /= total);
    EdgeDegrees { lambda, rho }
}
