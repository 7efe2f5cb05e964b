use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::invalid;
use crate::{rng, Error, Result};

/// `L` overlapping clusters of neuron indices plus the inverse map from
/// neuron to the clusters containing it.
///
/// Every cluster is a nonempty, strictly increasing list of indices below `n`
/// and every neuron belongs to at least one cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLayout {
    n: usize,
    clusters: Vec<Vec<usize>>,
    membership: Vec<Vec<usize>>,
}

impl ClusterLayout {
    pub fn new(n: usize, clusters: Vec<Vec<usize>>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(invalid("layout needs at least one cluster"));
        }
        let mut membership = vec![Vec::new(); n];
        for (c, idx) in clusters.iter().enumerate() {
            if idx.is_empty() {
                return Err(invalid(alloc::format!("cluster {c} is empty")));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(alloc::format!(
                    "cluster {c} indices are not strictly increasing"
                )));
            }
            for &i in idx {
                if i >= n {
                    return Err(invalid(alloc::format!(
                        "cluster {c} index {i} is out of range for n = {n}"
                    )));
                }
                membership[i].push(c);
            }
        }
        if let Some(orphan) = membership.iter().position(Vec::is_empty) {
            return Err(invalid(alloc::format!(
                "neuron {orphan} belongs to no cluster"
            )));
        }
        Ok(Self {
            n,
            clusters,
            membership,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster(&self, c: usize) -> Result<&[usize]> {
        self.clusters
            .get(c)
            .map(Vec::as_slice)
            .ok_or(Error::ClusterOutOfRange {
                cluster: c,
                clusters: self.clusters.len(),
            })
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    /// Clusters containing neuron `i`, in increasing order.
    pub fn membership(&self, i: usize) -> &[usize] {
        &self.membership[i]
    }

    pub fn memberships(&self) -> &[Vec<usize>] {
        &self.membership
    }

    pub fn mean_membership(&self) -> f64 {
        let edges: usize = self.clusters.iter().map(Vec::len).sum();
        edges as f64 / self.n as f64
    }
}

/// Sample a layout where each neuron joins roughly `target_membership`
/// clusters.
///
/// Each neuron draws its membership count from `{floor(t), ceil(t)}` so the
/// mean matches `t`, then joins the clusters that are least full relative to
/// a per-cluster capacity. Capacities are the mean size `n * t / L` scaled by
/// a uniform factor in `[1 - size_spread, 1 + size_spread]`.
pub fn random_cluster_layout(
    n: usize,
    num_clusters: usize,
    target_membership: f64,
    size_spread: f64,
    seed: u64,
) -> Result<ClusterLayout> {
    if num_clusters == 0 || n < num_clusters {
        return Err(invalid("need n >= L >= 1"));
    }
    if !(target_membership >= 1.0) {
        return Err(invalid("target membership must be at least 1"));
    }
    if target_membership > num_clusters as f64 {
        return Err(Error::Infeasible(alloc::format!(
            "target membership {target_membership} exceeds the number of clusters {num_clusters}"
        )));
    }
    if !(0.0..1.0).contains(&size_spread) {
        return Err(invalid("size spread must lie in [0, 1)"));
    }

    let mut rng = rng::from_seed(seed);
    let mean_size = n as f64 * target_membership / num_clusters as f64;
    let capacity: Vec<f64> = (0..num_clusters)
        .map(|_| {
            let f = if size_spread > 0.0 {
                rng.gen_range(-size_spread..=size_spread)
            } else {
                0.0
            };
            mean_size * (1.0 + f)
        })
        .collect();

    let base = libm::floor(target_membership) as usize;
    let frac = target_membership - base as f64;

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); num_clusters];
    let mut ranked: Vec<(f64, u64, usize)> = Vec::with_capacity(num_clusters);
    for &neuron in &order {
        let mut count = base + usize::from(frac > 0.0 && rng.gen_bool(frac));
        count = count.clamp(1, num_clusters);

        ranked.clear();
        ranked.extend(
            (0..num_clusters).map(|c| (clusters[c].len() as f64 / capacity[c], rng.gen::<u64>(), c)),
        );
        ranked.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, _, c) in ranked.iter().take(count) {
            clusters[c].push(neuron);
        }
    }
    for idx in &mut clusters {
        idx.sort_unstable();
    }
    ClusterLayout::new(n, clusters)
}
