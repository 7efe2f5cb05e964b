use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Error, Result};

/// Constraint matrix `W` of one cluster, `rows` constraints by `cols`
/// pattern neurons, stored as sorted `(row, col, value)` triplets.
///
/// Entries with `|value| <= zero_epsilon` are not stored: they are not edges
/// of the cluster graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseWeightMatrix {
    cluster_id: usize,
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
    zero_epsilon: f64,
}

impl SparseWeightMatrix {
    pub fn new(
        cluster_id: usize,
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
        zero_epsilon: f64,
    ) -> Result<Self> {
        if !(zero_epsilon >= 0.0) {
            return Err(invalid("zero epsilon must be nonnegative"));
        }
        entries.retain(|&(_, _, v)| libm::fabs(v) > zero_epsilon);
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(invalid(alloc::format!(
                    "entry ({r}, {c}) outside a {rows} x {cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(invalid("weights must be finite"));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(invalid("duplicate (row, col) entry"));
        }
        Ok(Self {
            cluster_id,
            rows,
            cols,
            entries,
            zero_epsilon,
        })
    }

    pub fn empty(cluster_id: usize, cols: usize) -> Self {
        Self {
            cluster_id,
            rows: 0,
            cols,
            entries: Vec::new(),
            zero_epsilon: 0.0,
        }
    }

    pub fn from_dense_rows(
        cluster_id: usize,
        cols: usize,
        dense: &[Vec<f64>],
        zero_epsilon: f64,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (r, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            entries.extend(row.iter().enumerate().map(|(c, &v)| (r, c, v)));
        }
        Self::new(cluster_id, dense.len(), cols, entries, zero_epsilon)
    }

    pub fn cluster_id(&self) -> usize {
        self.cluster_id
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn zero_epsilon(&self) -> f64 {
        self.zero_epsilon
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.cols]; self.rows];
        for &(r, c, v) in &self.entries {
            dense[r][c] = v;
        }
        dense
    }

    /// Number of stored entries in each column.
    pub fn column_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.cols];
        for &(_, c, _) in &self.entries {
            deg[c] += 1;
        }
        deg
    }

    /// Number of stored entries in each row.
    pub fn row_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.rows];
        for &(r, _, _) in &self.entries {
            deg[r] += 1;
        }
        deg
    }

    /// `W x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        let mut h = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            h[r] += v * x[c];
        }
        Ok(h)
    }

    /// `W^T y`.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: y.len(),
            });
        }
        let mut g = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            g[c] += v * y[r];
        }
        Ok(g)
    }

    /// Column sums of `|W|`.
    pub fn column_abs_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols];
        for &(_, c, v) in &self.entries {
            s[c] += libm::fabs(v);
        }
        s
    }

    pub fn max_row_l1_norm(&self) -> f64 {
        let mut s = vec![0.0; self.rows];
        for &(r, _, v) in &self.entries {
            s[r] += libm::fabs(v);
        }
        s.into_iter().fold(0.0, f64::max)
    }
}
