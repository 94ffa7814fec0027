//! Dense symmetric linear algebra used by the exact statistics and samplers.
//!
//! All reductions run in a fixed order that does not depend on the number
//! of worker threads, so results are reproducible bit-for-bit.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{BifbmError, Result};

const CHOL_BLOCK: usize = 128;
const SQUARE_BLOCK: usize = 256;

/// Bounds on the diagonal jitter a Cholesky factorization may add.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPolicy {
    /// Largest jitter tried, relative to the largest diagonal entry.
    pub max_relative: f64,
}

impl JitterPolicy {
    /// First jitter tried after a clean factorization fails, relative to the largest diagonal entry.
    pub const START_RELATIVE: f64 = 1e-12;
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy { max_relative: 1e-6 }
    }
}

/// Lower-triangular `L` with `L Lᵀ = A + jitter·I`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    lower: Array2<f64>,
    jitter: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    /// Absolute diagonal jitter that was added (0 for a clean factorization).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `out = L·x`, accumulated row by row in index order.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        assert_eq!(x.len(), n);
        assert_eq!(out.len(), n);
        let l = self.lower.as_slice().expect("factor is contiguous");
        for (i, o) in out.iter_mut().enumerate() {
            let row = &l[i * n..i * n + i + 1];
            *o = row.iter().zip(&x[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

/// Cholesky factorization of a symmetric positive semidefinite matrix.
///
/// Tries a clean factorization first. On failure, retries with jitter
/// `1e-12·max_diag`, doubling until it succeeds or exceeds
/// `policy.max_relative·max_diag`.
pub fn chol_factor(matrix: &Array2<f64>, policy: JitterPolicy) -> Result<CholeskyFactor> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(BifbmError::domain("matrix", format!("{}x{}", n, matrix.ncols()), "must be square"));
    }
    let max_diag = matrix.diag().iter().fold(0.0f64, |m, &d| m.max(d.abs()));
    let max_abs = matrix.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    for i in 0..n {
        for j in 0..i {
            if (matrix[[i, j]] - matrix[[j, i]]).abs() > 1e-12 * max_abs.max(1.0) {
                return Err(BifbmError::domain("matrix", format!("({i},{j})"), "must be symmetric"));
            }
        }
    }

    let mut jitter = 0.0;
    let cap = policy.max_relative * max_diag;
    loop {
        let mut work = matrix.to_owned();
        if jitter > 0.0 {
            work.diag_mut().mapv_inplace(|d| d + jitter);
        }
        match cholesky_in_place(&mut work) {
            Ok(()) => return Ok(CholeskyFactor { lower: work, jitter }),
            Err(pivot) => {
                let next = if jitter == 0.0 {
                    JitterPolicy::START_RELATIVE * max_diag
                } else {
                    2.0 * jitter
                };
                if next > cap || next == 0.0 {
                    return Err(BifbmError::Factorization { pivot, jitter });
                }
                jitter = next;
            }
        }
    }
}

/// Right-looking blocked Cholesky; leaves `L` in the lower triangle and
/// zeros above. Returns the failing pivot on a nonpositive pivot.
fn cholesky_in_place(a: &mut Array2<f64>) -> std::result::Result<(), usize> {
    let n = a.nrows();
    let mut l11 = vec![0.0; CHOL_BLOCK * CHOL_BLOCK];
    for k0 in (0..n).step_by(CHOL_BLOCK) {
        let k1 = (k0 + CHOL_BLOCK).min(n);
        let nb = k1 - k0;
        let data = a.as_slice_mut().expect("owned matrix is contiguous");

        // diagonal block, copied out so each row solve reads a compact L11
        for j in 0..nb {
            let row = &data[(k0 + j) * n + k0..(k0 + j) * n + k0 + j + 1];
            l11[j * nb..j * nb + j + 1].copy_from_slice(row);
        }
        for j in 0..nb {
            let (done, rest) = l11.split_at_mut(j * nb);
            let row = &mut rest[..j + 1];
            for p in 0..j {
                let lp = &done[p * nb..p * nb + p + 1];
                row[p] = (row[p] - dot(&row[..p], &lp[..p])) / lp[p];
            }
            let d = row[j] - dot(&row[..j], &row[..j]);
            if d.is_nan() || d <= 0.0 || d.is_infinite() {
                return Err(k0 + j);
            }
            row[j] = d.sqrt();
        }
        for j in 0..nb {
            data[(k0 + j) * n + k0..(k0 + j) * n + k0 + j + 1].copy_from_slice(&l11[j * nb..j * nb + j + 1]);
        }
        if k1 == n {
            break;
        }

        // panel: X = A21 L11^{-T}, one contiguous row segment at a time
        data[k1 * n..].par_chunks_mut(n).for_each(|row| {
            let seg = &mut row[k0..k1];
            for j in 0..nb {
                let lj = &l11[j * nb..j * nb + j + 1];
                seg[j] = (seg[j] - dot(&seg[..j], &lj[..j])) / lj[j];
            }
        });

        // trailing lower update A22 -= X Xᵀ, one block row at a time
        let panel = a.slice(s![k1.., k0..k1]).to_owned();
        for r0 in (k1..n).step_by(CHOL_BLOCK) {
            let r1 = (r0 + CHOL_BLOCK).min(n);
            let xr = panel.slice(s![r0 - k1..r1 - k1, ..]);
            let xc = panel.slice(s![..r1 - k1, ..]);
            let mut c = a.slice_mut(s![r0..r1, k1..r1]);
            general_mat_mul(-1.0, &xr, &xc.t(), 1.0, &mut c);
        }
    }
    let data = a.as_slice_mut().expect("owned matrix is contiguous");
    for i in 0..n {
        data[i * n + i + 1..(i + 1) * n].fill(0.0);
    }
    Ok(())
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `‖A²‖_F² = trace(A⁴)` for symmetric `A`.
///
/// Only the block upper triangle of `A²` is formed, one block row at a
/// time; block sums are combined in a fixed order.
pub fn sym_square_frobenius_sq(a: ArrayView2<'_, f64>) -> f64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let starts: Vec<usize> = (0..n).step_by(SQUARE_BLOCK).collect();
    let partial: Vec<f64> = starts
        .par_iter()
        .map(|&i0| {
            let i1 = (i0 + SQUARE_BLOCK).min(n);
            let rows = a.slice(s![i0..i1, ..]);
            let cols = a.slice(s![.., i0..]);
            let mut prod = Array2::<f64>::zeros((i1 - i0, n - i0));
            general_mat_mul(1.0, &rows, &cols, 0.0, &mut prod);
            let mut diag_block = 0.0;
            let mut off_block = 0.0;
            for row in prod.rows() {
                let (d, o) = row.as_slice().expect("contiguous").split_at(i1 - i0);
                diag_block += d.iter().map(|v| v * v).sum::<f64>();
                off_block += o.iter().map(|v| v * v).sum::<f64>();
            }
            diag_block + 2.0 * off_block
        })
        .collect();
    partial.iter().sum()
}
