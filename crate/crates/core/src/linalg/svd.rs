//! Truncated SVD through the eigendecomposition of the smaller Gram matrix.

use super::eig::sym_eig;
use crate::error::{Error, Result};
use crate::tensor::kernels::matmul;

/// `X ≈ U·diag(S)·Vᵀ` with `U: rows × k`, `V: cols × k`, both row-major.
#[derive(Clone, Debug)]
pub struct TruncatedSvd {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
    /// Singular values beyond `k`, descending.
    pub dropped: Vec<f64>,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut us = self.u.clone();
        for row in us.chunks_mut(self.k) {
            for (x, s) in row.iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        let mut out = vec![0.0; self.rows * self.cols];
        matmul(&us, &self.v, self.rows, self.k, self.cols, false, true, &mut out, false);
        out
    }

    /// Eckart–Young residual `Σ dropped σ²`.
    pub fn residual_sq(&self) -> f64 {
        self.dropped.iter().map(|s| s * s).sum()
    }
}

/// Top-`k` singular triplets of a row-major `rows × cols` matrix.
pub fn truncated_svd(x: &[f64], rows: usize, cols: usize, k: usize) -> Result<TruncatedSvd> {
    if x.len() != rows * cols {
        return Err(Error::invalid(format!(
            "matrix {rows}x{cols} needs {} values, got {}",
            rows * cols,
            x.len()
        )));
    }
    let full = rows.min(cols);
    if k == 0 || k > full {
        return Err(Error::invalid(format!("rank {k} outside 1..={full}")));
    }
    let small = full;
    let mut gram = vec![0.0; small * small];
    let by_cols = cols <= rows;
    if by_cols {
        matmul(x, x, cols, rows, cols, true, false, &mut gram, false);
    } else {
        matmul(x, x, rows, cols, rows, false, true, &mut gram, false);
    }
    symmetrize(&mut gram, small);
    let eig = sym_eig(&gram, small)?;
    let sing: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let tol = sing[0].max(f64::MIN_POSITIVE) * 1e-12 * (small as f64);

    // The Gram side is orthonormal from the eigensolver; the other side is
    // recovered as X·w/σ and completed for vanishing σ.
    let gram_side: Vec<Vec<f64>> = (0..k).map(|j| eig.vector(j)).collect();
    let other_len = if by_cols { rows } else { cols };
    let mut other: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (j, w) in gram_side.iter().enumerate() {
        let mut o = vec![0.0; other_len];
        if sing[j] > tol {
            if by_cols {
                matmul(x, w, rows, cols, 1, false, false, &mut o, false);
            } else {
                matmul(x, w, cols, rows, 1, true, false, &mut o, false);
            }
            o.iter_mut().for_each(|v| *v /= sing[j]);
        } else {
            o = complete_basis(&other, other_len);
        }
        other.push(o);
    }

    let (u_cols, v_cols) = if by_cols { (other, gram_side) } else { (gram_side, other) };
    Ok(TruncatedSvd {
        rows,
        cols,
        k,
        u: to_row_major(&u_cols, rows),
        s: sing[..k].to_vec(),
        v: to_row_major(&v_cols, cols),
        dropped: sing[k..].to_vec(),
    })
}

fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
}

fn to_row_major(columns: &[Vec<f64>], len: usize) -> Vec<f64> {
    let k = columns.len();
    let mut out = vec![0.0; len * k];
    for (j, c) in columns.iter().enumerate() {
        for i in 0..len {
            out[i * k + j] = c[i];
        }
    }
    out
}

/// A unit vector orthogonal to `basis`, by Gram–Schmidt on coordinate axes.
fn complete_basis(basis: &[Vec<f64>], len: usize) -> Vec<f64> {
    let mut best = vec![0.0; len];
    let mut best_norm = 0.0;
    for axis in 0..len {
        let mut v = vec![0.0; len];
        v[axis] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let dot: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > best_norm {
            best_norm = norm;
            best = v;
        }
        if norm > 0.5 {
            break;
        }
    }
    best.iter_mut().for_each(|x| *x /= best_norm);
    best
}
