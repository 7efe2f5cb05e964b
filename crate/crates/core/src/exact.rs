//! Exact integer linear algebra.
//!
//! Rank is computed by fraction-free (Bareiss) elimination over `i128`, so
//! every intermediate value is a minor of the input and no tolerance is
//! involved. Arithmetic is checked; a minor that does not fit in `i128` is
//! reported as [`Error::Overflow`].

use alloc::vec::Vec;

use crate::{Error, Result};

/// Rank over the rationals of a row-major `rows x cols` integer matrix.
pub fn integer_rank(data: &[i64], cols: usize) -> Result<usize> {
    if cols == 0 || data.is_empty() {
        return Ok(0);
    }
    if !data.len().is_multiple_of(cols) {
        return Err(Error::DimensionMismatch {
            expected: cols,
            actual: data.len() % cols,
        });
    }
    let mut m: Vec<Vec<i128>> = data
        .chunks_exact(cols)
        .filter(|row| row.iter().any(|&v| v != 0))
        .map(|row| row.iter().map(|&v| v as i128).collect())
        .collect();
    let rows = m.len();

    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        let p = m[rank][col];
        for r in rank + 1..rows {
            let f = m[r][col];
            for c in col + 1..cols {
                let a = p.checked_mul(m[r][c]).ok_or(Error::Overflow)?;
                let b = f.checked_mul(m[rank][c]).ok_or(Error::Overflow)?;
                m[r][c] = a.checked_sub(b).ok_or(Error::Overflow)? / prev;
            }
            m[r][col] = 0;
        }
        prev = p;
        rank += 1;
    }
    Ok(rank)
}

/// Rank of a matrix given as rows of unsigned entries.
pub fn integer_rank_u32(data: &[u32], cols: usize) -> Result<usize> {
    let wide: Vec<i64> = data.iter().map(|&v| v as i64).collect();
    integer_rank(&wide, cols)
}
