#![allow(dead_code)]

use clustered_am::model::random_cluster_layout;
use clustered_am::synth::{enumerate_patterns, make_generator_matrix, DegreeBound, GeneratorSpec};
use clustered_am::{ClusterLayout, Dataset};

const PRIMES: [u64; 2] = [2_147_483_647, 1_000_000_007];

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn rank_mod(rows: &[Vec<i64>], p: u64) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| v.rem_euclid(p as i64) as u64).collect())
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c] * inv % p;
                for k in c..cols {
                    let sub = f * m[rank][k] % p;
                    m[r][k] = (m[r][k] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Rank over the rationals. Reduction modulo a prime never raises the rank,
/// and two large primes both dropping it is vanishingly unlikely for small
/// integer matrices.
pub fn rational_rank(rows: &[Vec<i64>]) -> usize {
    PRIMES.iter().map(|&p| rank_mod(rows, p)).max().unwrap_or(0)
}

pub fn dataset_rows(d: &Dataset) -> Vec<Vec<i64>> {
    d.patterns().map(|p| p.iter().map(|&v| v as i64).collect()).collect()
}

pub fn spec(k: usize, n: usize, q: u32, seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        k,
        n,
        gamma: 2,
        upsilon: 2,
        alphabet_size: q,
        seed,
        bound: DegreeBound::Max,
    }
}

/// Full enumeration of a small subspace dataset.
pub fn subspace_dataset(k: usize, n: usize, q: u32, seed: u64) -> Dataset {
    let g = make_generator_matrix(&spec(k, n, q, seed)).unwrap();
    enumerate_patterns(&g, 2, q, None).unwrap().dataset
}

pub fn layout(n: usize, clusters: usize, membership: f64, seed: u64) -> ClusterLayout {
    random_cluster_layout(n, clusters, membership, 0.0, seed).unwrap()
}

/// `count` uniformly drawn patterns of a subspace dataset.
pub fn sampled_dataset(k: usize, n: usize, q: u32, count: usize, seed: u64) -> Dataset {
    let g = make_generator_matrix(&spec(k, n, q, seed)).unwrap();
    clustered_am::synth::sample_patterns(&g, 2, q, count, seed ^ 0x5eed).unwrap().dataset
}
