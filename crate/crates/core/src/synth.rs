//! Exponential-capacity pattern sets.
//!
//! Patterns are `x = Gᵀu` for a nonnegative integer `k x n` generator `G` of
//! rank `k` and coefficient vectors `u ∈ {0, .., υ-1}^k`. Every pattern lies
//! in the `k`-dimensional row space of `G`, and there are `υ^k` of them.
//!
//! Entry `j` of a pattern is bounded by `d_j (γ-1)(υ-1)` where `d_j` is the
//! number of nonzeros in column `j` of `G`. Keeping every column degree at or
//! below `(Q-1) / ((γ-1)(υ-1))` guarantees all patterns fit the alphabet, so
//! that is the default [`DegreeBound::Max`] mode. [`DegreeBound::Reject`]
//! only bounds the minimum column degree and filters out-of-range patterns.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::error::invalid;
use crate::exact::integer_rank_u32;
use crate::model::Dataset;
use crate::{rng, Error, Result};

/// Largest pattern set `enumerate_patterns` builds without an explicit limit.
pub const MAX_ENUMERATION: usize = 1 << 24;

const RANK_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeBound {
    /// Every column degree respects the alphabet budget; nothing is rejected.
    #[default]
    Max,
    /// Column degrees are unconstrained beyond the planted identity block;
    /// patterns with entries above `Q-1` are dropped during enumeration.
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub k: usize,
    pub n: usize,
    /// Entries of `G` lie in `[0, gamma-1]`.
    pub gamma: u32,
    /// Entries of `u` lie in `[0, upsilon-1]`.
    pub upsilon: u32,
    pub alphabet_size: u32,
    pub seed: u64,
    pub bound: DegreeBound,
}

impl GeneratorSpec {
    pub fn ratio(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// `floor((Q-1) / ((γ-1)(υ-1)))`.
    pub fn degree_budget(&self) -> usize {
        let denom = (self.gamma as u64 - 1) * (self.upsilon as u64 - 1);
        ((self.alphabet_size as u64 - 1) / denom) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.n {
            return Err(invalid("need 1 <= k <= n"));
        }
        if self.gamma < 2 || self.upsilon < 2 {
            return Err(invalid("gamma and upsilon must be at least 2"));
        }
        if self.alphabet_size < 2 {
            return Err(invalid("alphabet size must be at least 2"));
        }
        if self.degree_budget() == 0 {
            return Err(Error::Infeasible(alloc::format!(
                "Q - 1 = {} < (gamma - 1)(upsilon - 1) = {}: no column can be nonzero",
                self.alphabet_size - 1,
                (self.gamma - 1) * (self.upsilon - 1)
            )));
        }
        Ok(())
    }
}

/// Nonnegative integer generator matrix, row-major `k x n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorMatrix {
    k: usize,
    n: usize,
    data: Vec<u32>,
}

impl GeneratorMatrix {
    pub fn new(k: usize, n: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != k * n {
            return Err(Error::DimensionMismatch {
                expected: k * n,
                actual: data.len(),
            });
        }
        Ok(Self { k, n, data })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[u32] {
        &self.data
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|j| (0..self.k).filter(|&i| self.data[i * self.n + j] != 0).count())
            .collect()
    }

    pub fn rank(&self) -> Result<usize> {
        integer_rank_u32(&self.data, self.n)
    }

    /// `Gᵀu`.
    pub fn combine(&self, u: &[u32]) -> Vec<u64> {
        let mut x = vec![0u64; self.n];
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0 {
                continue;
            }
            for (xj, &g) in x.iter_mut().zip(self.row(i)) {
                *xj += ui as u64 * g as u64;
            }
        }
        x
    }
}

/// Build a rank-`k` generator: a randomly placed `k x k` scaled identity
/// block plus sparse random columns within the degree budget.
pub fn make_generator_matrix(spec: &GeneratorSpec) -> Result<GeneratorMatrix> {
    spec.validate()?;
    let (k, n) = (spec.k, spec.n);
    let max_degree = match spec.bound {
        DegreeBound::Max => spec.degree_budget().min(k),
        DegreeBound::Reject => k,
    };

    for attempt in 0..RANK_RETRIES {
        let mut rng = rng::from_seed(rng::derive(spec.seed, &[attempt as u64]));
        let mut data = vec![0u32; k * n];
        let mut columns: Vec<usize> = (0..n).collect();
        columns.shuffle(&mut rng);
        let (planted, rest) = columns.split_at(k);
        for (i, &j) in planted.iter().enumerate() {
            data[i * n + j] = rng.gen_range(1..spec.gamma);
        }
        for &j in rest {
            let degree = rng.gen_range(1..=max_degree);
            for i in index::sample(&mut rng, k, degree) {
                data[i * n + j] = rng.gen_range(1..spec.gamma);
            }
        }
        let g = GeneratorMatrix { k, n, data };
        if g.rank()? == k {
            return Ok(g);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: RANK_RETRIES,
        reason: "generator never reached rank k".to_string(),
    })
}

/// Result of [`enumerate_patterns`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub dataset: Dataset,
    /// Candidates dropped for leaving the alphabet. Always zero when the
    /// generator respects the degree budget.
    pub rejected: usize,
}

/// Emit `x = Gᵀu` for `u` in lexicographic order (first coordinate most
/// significant), stopping after `limit` accepted patterns.
pub fn enumerate_patterns(
    g: &GeneratorMatrix,
    upsilon: u32,
    alphabet_size: u32,
    limit: Option<usize>,
) -> Result<Enumeration> {
    if upsilon < 2 {
        return Err(invalid("upsilon must be at least 2"));
    }
    let total = (upsilon as u128).checked_pow(g.k as u32);
    let cap = match (limit, total) {
        (Some(l), _) => l,
        (None, Some(t)) if t <= MAX_ENUMERATION as u128 => t as usize,
        _ => {
            return Err(Error::Infeasible(alloc::format!(
                "upsilon^k exceeds the enumeration budget of {MAX_ENUMERATION}; pass a limit"
            )))
        }
    };

    let top = alphabet_size as u64 - 1;
    let mut u = vec![0u32; g.k];
    let mut data = Vec::with_capacity(cap.min(MAX_ENUMERATION) * g.n);
    let mut accepted = 0;
    let mut rejected = 0;
    'outer: while accepted < cap {
        let x = g.combine(&u);
        if x.iter().all(|&v| v <= top) {
            data.extend(x.iter().map(|&v| v as u32));
            accepted += 1;
        } else {
            rejected += 1;
        }
        // odometer increment, last coordinate fastest
        for i in (0..g.k).rev() {
            u[i] += 1;
            if u[i] < upsilon {
                continue 'outer;
            }
            u[i] = 0;
        }
        break;
    }
    Ok(Enumeration {
        dataset: Dataset::from_flat(g.n, alphabet_size, data)?,
        rejected,
    })
}

/// Draw `count` patterns with independent uniform coefficient vectors.
/// Out-of-range candidates are redrawn and counted.
pub fn sample_patterns(
    g: &GeneratorMatrix,
    upsilon: u32,
    alphabet_size: u32,
    count: usize,
    seed: u64,
) -> Result<Enumeration> {
    if upsilon < 2 {
        return Err(invalid("upsilon must be at least 2"));
    }
    let mut rng = rng::from_seed(seed);
    let top = alphabet_size as u64 - 1;
    let mut data = Vec::with_capacity(count * g.n);
    let mut rejected = 0;
    let mut u = vec![0u32; g.k];
    let mut accepted = 0;
    while accepted < count {
        u.iter_mut().for_each(|v| *v = rng.gen_range(0..upsilon));
        let x = g.combine(&u);
        if x.iter().all(|&v| v <= top) {
            data.extend(x.iter().map(|&v| v as u32));
            accepted += 1;
        } else {
            rejected += 1;
            if rejected > 1000 * (count + 1) {
                return Err(Error::Infeasible(
                    "almost every sampled pattern leaves the alphabet".to_string(),
                ));
            }
        }
    }
    Ok(Enumeration {
        dataset: Dataset::from_flat(g.n, alphabet_size, data)?,
        rejected,
    })
}

/// Exact rank of the `C x n` pattern matrix.
pub fn verify_rank(dataset: &Dataset) -> Result<usize> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    integer_rank_u32(dataset.as_flat(), dataset.n())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: usize, n: usize, q: u32) -> GeneratorSpec {
        GeneratorSpec {
            k,
            n,
            gamma: 2,
            upsilon: 2,
            alphabet_size: q,
            seed: 5,
            bound: DegreeBound::Max,
        }
    }

    #[test]
    fn hand_generator_enumerates_four_patterns() {
        let g = GeneratorMatrix::new(2, 3, vec![1, 0, 1, 0, 1, 1]).unwrap();
        assert_eq!(g.rank().unwrap(), 2);
        let e = enumerate_patterns(&g, 2, 3, None).unwrap();
        assert_eq!(e.rejected, 0);
        let rows: Vec<&[u32]> = e.dataset.patterns().collect();
        assert_eq!(rows, vec![&[0, 0, 0][..], &[0, 1, 1], &[1, 0, 1], &[1, 1, 2]]);
        assert_eq!(verify_rank(&e.dataset).unwrap(), 2);
    }

    #[test]
    fn trivial_generator() {
        let g = make_generator_matrix(&spec(1, 1, 2)).unwrap();
        assert_eq!(g.as_flat(), &[1]);
    }

    #[test]
    fn degree_budget_bounds_columns() {
        let s = spec(4, 30, 3);
        assert_eq!(s.degree_budget(), 2);
        let g = make_generator_matrix(&s).unwrap();
        assert_eq!(g.rank().unwrap(), 4);
        assert!(g.column_degrees().iter().all(|&d| (1..=2).contains(&d)));
    }

    #[test]
    fn infeasible_alphabet() {
        let mut s = spec(3, 6, 2);
        s.upsilon = 3;
        // (γ-1)(υ-1) = 2 > Q-1 = 1
        assert!(matches!(make_generator_matrix(&s), Err(Error::Infeasible(_))));
    }

    #[test]
    fn limit_and_budget() {
        let g = make_generator_matrix(&spec(12, 24, 4)).unwrap();
        let e = enumerate_patterns(&g, 2, 4, Some(10)).unwrap();
        assert_eq!(e.dataset.len(), 10);
        assert!(e.dataset.pattern(0).iter().all(|&v| v == 0));

        let big = make_generator_matrix(&spec(30, 40, 4)).unwrap();
        assert!(enumerate_patterns(&big, 2, 4, None).is_err());
    }

    #[test]
    fn reject_mode_filters() {
        let mut s = spec(6, 12, 3);
        s.bound = DegreeBound::Reject;
        let g = make_generator_matrix(&s).unwrap();
        let e = enumerate_patterns(&g, 2, 3, None).unwrap();
        assert_eq!(e.dataset.len() + e.rejected, 64);
        assert!(e.dataset.as_flat().iter().all(|&v| v <= 2));
    }

    #[test]
    fn all_zero_rank() {
        let d = Dataset::new(3, 2, vec![vec![0, 0, 0], vec![0, 0, 0]]).unwrap();
        assert_eq!(verify_rank(&d).unwrap(), 0);
    }
}
