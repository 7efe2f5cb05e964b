//! Dense real linear algebra used by learning and analysis.

use alloc::vec::Vec;

use crate::math::sqrt;

/// Numerical rank by Gaussian elimination with partial pivoting. A pivot
/// counts when its magnitude exceeds `rel_tol` times the largest entry.
pub fn real_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let r = m.len();
    if r == 0 {
        return 0;
    }
    let cols = m[0].len();
    let scale = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |a, &v| a.max(libm::fabs(v)));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for col in 0..cols {
        if rank == r {
            break;
        }
        let (pivot, best) = (rank..r)
            .map(|i| (i, libm::fabs(m[i][col])))
            .fold((rank, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        m.swap(rank, pivot);
        for i in rank + 1..r {
            let f = m[i][col] / m[rank][col];
            if f != 0.0 {
                for c in col..cols {
                    m[i][c] -= f * m[rank][c];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// unsorted. Only the symmetric part of `a` is meaningful.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    const MAX_SWEEPS: usize = 100;
    let n = a.len();
    let frob = sqrt(a.iter().flat_map(|r| r.iter()).map(|v| v * v).sum::<f64>());
    if frob == 0.0 {
        return alloc::vec![0.0; n];
    }

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if sqrt(off) <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if libm::fabs(apq) <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}
