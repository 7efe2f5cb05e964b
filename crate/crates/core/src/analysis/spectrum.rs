use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::symmetric_eigenvalues;
use crate::model::Dataset;
use crate::{Error, Result};

/// `A = XᵀX` with the patterns as rows of `X`.
pub fn correlation_matrix(dataset: &Dataset) -> Vec<Vec<f64>> {
    let n = dataset.n();
    let mut a = vec![vec![0.0; n]; n];
    for p in dataset.patterns() {
        for (i, &xi) in p.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let xi = xi as f64;
            for (j, &xj) in p.iter().enumerate().skip(i) {
                a[i][j] += xi * xj as f64;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    a
}

/// Eigenvalues of `XᵀX`, sorted descending, without clamping.
pub fn eigen_spectrum_unclamped(dataset: &Dataset) -> Result<Vec<f64>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut values = symmetric_eigenvalues(correlation_matrix(dataset));
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Eigenvalues of `XᵀX`, sorted descending; values below `1e-10 · max` are
/// set to 0.
pub fn eigen_spectrum(dataset: &Dataset) -> Result<Vec<f64>> {
    let mut values = eigen_spectrum_unclamped(dataset)?;
    let cutoff = 1e-10 * values.first().copied().unwrap_or(0.0);
    values.iter_mut().filter(|v| **v < cutoff).for_each(|v| *v = 0.0);
    Ok(values)
}
