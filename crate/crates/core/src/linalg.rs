//! Minimal dense linear algebra for small symmetric systems.
//!
//! Everything the GP machinery needs: a row-major matrix, a lower-triangular
//! Cholesky factorization with solves and log-determinant, a rank-one row/column
//! extension of an existing factor, and a cyclic Jacobi eigensolver for
//! symmetric matrices. Sizes stay in the hundreds for training data and in the
//! low thousands for grid covariances, so straightforward triple loops are fine.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Panel width of the blocked factorization; matrices at or below this order
/// use the unblocked form.
const FACTOR_BLOCK: usize = 128;

/// Rows per task in the blocked trailing update; sized so a tile's panel
/// slices stay resident in cache while source panel rows stream through.
const FACTOR_TILE: usize = 64;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Maximum absolute asymmetry |a_ij - a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Dot product with four accumulators so the reduction vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in chunks * 4..a.len() {
        tail += a[i] * b[i];
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// Lower-triangular Cholesky factor L of a symmetric positive definite matrix,
/// A = L Lᵀ. Stored dense; the strict upper triangle is zero.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factorize `a + jitter * I`. Fails with a condition estimate when a pivot
    /// is not positive.
    ///
    /// Small matrices use the unblocked left-looking form; larger ones a
    /// right-looking blocked form whose trailing update is tiled so panel rows
    /// stay in cache. Every entry is produced by a fixed-order dot product, so
    /// results are deterministic under any thread count.
    pub fn factor(a: &Matrix, jitter: f64) -> Result<Self> {
        assert!(a.is_square(), "cholesky needs a square matrix");
        let n = a.rows();
        if n <= FACTOR_BLOCK {
            return Self::factor_unblocked(a, jitter);
        }
        Self::factor_blocked(a, jitter)
    }

    fn factor_unblocked(a: &Matrix, jitter: f64) -> Result<Self> {
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        let mut max_pivot = f64::MIN_POSITIVE;
        for j in 0..n {
            let row_j = &l.data[j * n..j * n + j];
            let d = a[(j, j)] + jitter - dot(row_j, row_j);
            if !(d > 0.0) || !d.is_finite() {
                let condition = if d <= 0.0 { f64::INFINITY } else { max_pivot / d };
                return Err(Error::Numerical {
                    what: format!("non-positive pivot {d:.3e} at column {j} during factorization"),
                    condition,
                });
            }
            max_pivot = max_pivot.max(d);
            let dj = d.sqrt();
            l.data[j * n + j] = dj;
            // fill column j below the diagonal, reading the finished row j
            for i in (j + 1)..n {
                let (upper, lower) = l.data.split_at_mut(i * n);
                let row_j = &upper[j * n..j * n + j];
                let row_i = &mut lower[..=j];
                let s = a[(i, j)] - dot(&row_i[..j], row_j);
                row_i[j] = s / dj;
            }
        }
        Ok(Cholesky { l })
    }

    /// Right-looking blocked factorization working in place on the lower
    /// triangle. Per panel: factor the diagonal block, triangular-solve the
    /// rows below it, then subtract the panel's outer product from the
    /// trailing triangle in row tiles.
    fn factor_blocked(a: &Matrix, jitter: f64) -> Result<Self> {
        let n = a.rows();
        let b = FACTOR_BLOCK;
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                l.data[i * n + j] = a[(i, j)];
            }
            l.data[i * n + i] += jitter;
        }
        let mut max_pivot = f64::MIN_POSITIVE;
        let mut k = 0;
        while k < n {
            let kb = b.min(n - k);
            // factor the diagonal block in place (already fully updated)
            for j in k..k + kb {
                let row_j = &l.data[j * n + k..j * n + j];
                let d = l.data[j * n + j] - dot(row_j, row_j);
                if !(d > 0.0) || !d.is_finite() {
                    let condition = if d <= 0.0 { f64::INFINITY } else { max_pivot / d };
                    return Err(Error::Numerical {
                        what: format!(
                            "non-positive pivot {d:.3e} at column {j} during factorization"
                        ),
                        condition,
                    });
                }
                max_pivot = max_pivot.max(d);
                let dj = d.sqrt();
                l.data[j * n + j] = dj;
                for i in (j + 1)..k + kb {
                    let (upper, lower) = l.data.split_at_mut(i * n);
                    let row_j = &upper[j * n + k..j * n + j];
                    let s = lower[j] - dot(&lower[k..j], row_j);
                    lower[j] = s / dj;
                }
            }
            if k + kb == n {
                break;
            }
            // panel solve: rows below the block against the block's factor
            {
                let (block_rows, below) = l.data.split_at_mut((k + kb) * n);
                let block = &block_rows[k * n..];
                below.par_chunks_mut(n).for_each(|row_i| {
                    for j in k..k + kb {
                        let row_j = &block[(j - k) * n + k..(j - k) * n + j];
                        let s = row_i[j] - dot(&row_i[k..j], row_j);
                        row_i[j] = s / block[(j - k) * n + j];
                    }
                });
            }
            // trailing update against a copy of the solved panel: tiles of
            // rows run in parallel, and within a tile each panel row is
            // loaded once and applied to every row of the tile
            {
                let base = k + kb;
                let rows_below = n - base;
                let mut panel = vec![0.0; rows_below * kb];
                for (r, dst) in panel.chunks_mut(kb).enumerate() {
                    let at = (base + r) * n + k;
                    dst.copy_from_slice(&l.data[at..at + kb]);
                }
                let panel = &panel;
                let (_, trailing) = l.data.split_at_mut(base * n);
                trailing.par_chunks_mut(FACTOR_TILE * n).enumerate().for_each(
                    |(tile_idx, tile)| {
                        let first_rel = tile_idx * FACTOR_TILE;
                        let last_rel = first_rel + tile.len() / n - 1;
                        for j_rel in 0..=last_rel {
                            let p_j = &panel[j_rel * kb..(j_rel + 1) * kb];
                            for (r, row_i) in tile.chunks_mut(n).enumerate() {
                                let i_rel = first_rel + r;
                                if i_rel < j_rel {
                                    continue;
                                }
                                let p_i = &panel[i_rel * kb..(i_rel + 1) * kb];
                                row_i[base + j_rel] -= dot(p_i, p_j);
                            }
                        }
                    },
                );
            }
            k += kb;
        }
        // zero the strict upper triangle left over from the in-place copy
        for i in 0..n {
            for j in (i + 1)..n {
                l.data[i * n + j] = 0.0;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor_ref(&self) -> &Matrix {
        &self.l
    }

    /// Solve L w = b.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut w = vec![0.0; n];
        for i in 0..n {
            let row_i = &self.l.data[i * n..i * n + i];
            w[i] = (b[i] - dot(row_i, &w[..i])) / self.l.data[i * n + i];
        }
        w
    }

    /// Solve Lᵀ x = b.
    pub fn backward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    /// Solve A x = b where A = L Lᵀ.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.backward(&self.forward(b))
    }

    /// log det A = 2 Σ log L_ii.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| self.l[(i, i)].ln()).sum::<f64>() * 2.0
    }

    /// Extend the factor of A to the factor of [[A, u], [uᵀ, c]] in O(n²).
    ///
    /// The pivot of the new row is the Schur complement s = c - uᵀ A⁻¹ u; a
    /// non-positive s means the extended matrix is numerically indefinite and
    /// the caller should refactorize from scratch.
    pub fn extend(&self, u: &[f64], c: f64) -> Result<Self> {
        let n = self.dim();
        assert_eq!(u.len(), n);
        let w = self.forward(u);
        let s = c - w.iter().map(|x| x * x).sum::<f64>();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Numerical {
                what: format!("non-positive Schur pivot {s:.3e} while extending factor to {}", n + 1),
                condition: if s <= 0.0 { f64::INFINITY } else { c / s },
            });
        }
        let mut l = Matrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..=i {
                l[(i, j)] = self.l[(i, j)];
            }
        }
        for (j, wj) in w.iter().enumerate() {
            l[(n, j)] = *wj;
        }
        l[(n, n)] = s.sqrt();
        Ok(Cholesky { l })
    }

    /// L z for a vector z (used to push white noise through the factor).
    pub fn mul_vec(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(z.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            out[i] = dot(&self.l.data[i * n..i * n + i + 1], &z[..=i]);
        }
        out
    }
}

/// Eigenvalues of a symmetric matrix via the cyclic Jacobi method.
///
/// Returns eigenvalues in descending order. Adequate for the subset sizes used
/// in mutual-information computations (tens of points).
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    let n = a.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.clone();
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(1e-300, f64::max);
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "eigenvalue iteration" });
    }
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eig)
}
