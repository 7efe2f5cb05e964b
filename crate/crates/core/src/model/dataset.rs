use alloc::vec::Vec;

use super::ClusterLayout;
use crate::{Error, Result};

/// `C` integer patterns of length `n` over the alphabet `{0, .., Q-1}`,
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    alphabet_size: u32,
    data: Vec<u32>,
}

impl Dataset {
    pub fn new(n: usize, alphabet_size: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(n, alphabet_size, data)
    }

    pub fn from_flat(n: usize, alphabet_size: u32, data: Vec<u32>) -> Result<Self> {
        if alphabet_size < 2 {
            return Err(crate::error::invalid("alphabet size must be at least 2"));
        }
        if n == 0 {
            return Err(crate::error::invalid("pattern length must be positive"));
        }
        if !data.len().is_multiple_of(n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: data.len() % n,
            });
        }
        if let Some(&v) = data.iter().find(|&&v| v >= alphabet_size) {
            return Err(Error::OutOfAlphabet {
                value: v as u64,
                max: alphabet_size as u64 - 1,
            });
        }
        Ok(Self {
            n,
            alphabet_size,
            data,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    /// Number of patterns `C`.
    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pattern(&self, i: usize) -> &[u32] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn patterns(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.data.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[u32] {
        &self.data
    }

    /// All sub-patterns of cluster `cluster`, as reals, one per pattern.
    pub fn subpatterns_f64(&self, layout: &ClusterLayout, cluster: usize) -> Result<Vec<Vec<f64>>> {
        let idx = layout.cluster(cluster)?;
        Ok(self
            .patterns()
            .map(|p| idx.iter().map(|&i| p[i] as f64).collect())
            .collect())
    }
}

/// Restrict `x` to the indices of cluster `cluster`, in index order.
pub fn extract_subpattern<T: Copy>(x: &[T], layout: &ClusterLayout, cluster: usize) -> Result<Vec<T>> {
    if x.len() != layout.n() {
        return Err(Error::DimensionMismatch {
            expected: layout.n(),
            actual: x.len(),
        });
    }
    Ok(layout.cluster(cluster)?.iter().map(|&i| x[i]).collect())
}
