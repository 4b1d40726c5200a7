//! Symmetric eigendecomposition.
//!
//! [`sym_eig`] reduces to tridiagonal form with Householder reflections and
//! then runs implicit QL with Wilkinson-style shifts. [`sym_eig_jacobi`] is a
//! cyclic Jacobi solver; it is slower but shares no code with the QL path.

use crate::error::{Error, Result};

pub const MAX_EIG_SIZE: usize = 4096;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
#[derive(Clone, Debug)]
pub struct SymEigResult {
    pub n: usize,
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
}

impl SymEigResult {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }

    fn from_rows(n: usize, pairs: Vec<(f64, Vec<f64>)>) -> Self {
        let mut pairs = pairs;
        // Descending; ties keep their original order.
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut vectors = vec![0.0; n * n];
        let mut values = Vec::with_capacity(n);
        for (j, (val, vec)) in pairs.into_iter().enumerate() {
            values.push(val);
            for i in 0..n {
                vectors[i * n + j] = vec[i];
            }
        }
        Self { n, values, vectors }
    }
}

pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn validate(a: &[f64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::invalid(format!("expected {n}x{n} matrix, got {} values", a.len())));
    }
    if n == 0 || n > MAX_EIG_SIZE {
        return Err(Error::invalid(format!("matrix size {n} outside 1..={MAX_EIG_SIZE}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { op: "sym_eig" });
    }
    let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((a[i * n + j] - a[j * n + i]).abs());
        }
    }
    if worst > 1e-12 * scale {
        return Err(Error::Asymmetric { max_asymmetry: worst });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric row-major `n × n` matrix.
pub fn sym_eig(a: &[f64], n: usize) -> Result<SymEigResult> {
    validate(a, n)?;
    // `z` holds the transposed accumulator: z[c*n + r] is V[r][c].
    let mut z = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e, n);
    tridiagonal_ql(&mut z, &mut d, &mut e, n)?;
    let pairs = (0..n).map(|j| (d[j], z[j * n..(j + 1) * n].to_vec())).collect();
    Ok(SymEigResult::from_rows(n, pairs))
}

/// Householder reduction to tridiagonal form, accumulating the transform.
/// Storage is transposed (`v(r, c)` lives at `z[c*n + r]`) so the inner
/// loops run over contiguous memory.
fn tridiagonalize(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    let at = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = z[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = z[at(i - 1, j)];
                z[at(i, j)] = 0.0;
                z[at(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                z[at(j, i)] = f;
                let mut g = e[j] + z[at(j, j)] * f;
                let col = &z[j * n..j * n + i];
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut z[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = z[at(i - 1, j)];
                z[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        z[at(n - 1, i)] = z[at(i, i)];
        z[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = z[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let src = &hi[..=i];
                let dst = &mut lo[j * n..j * n + i + 1];
                let g: f64 = src.iter().zip(dst.iter()).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    dst[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            z[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = z[at(n - 1, j)];
        z[at(n - 1, j)] = 0.0;
    }
    z[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal (d, e); rotations are applied to the rows
/// of `z`, which end up holding the eigenvectors.
fn tridiagonal_ql(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 60 {
                    return Err(Error::Numeric("tridiagonal QL failed to converge".into()));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let zi = &mut lo[i * n..];
                    let zi1 = &mut hi[..n];
                    for k in 0..n {
                        let h = zi1[k];
                        zi1[k] = s * zi[k] + c * h;
                        zi[k] = c * zi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Cyclic Jacobi rotations; stops once the off-diagonal Frobenius norm falls
/// below `1e-12·‖A‖_F` or after 100 sweeps.
pub fn sym_eig_jacobi(a: &[f64], n: usize) -> Result<SymEigResult> {
    validate(a, n)?;
    let mut m = a.to_vec();
    // Rows of `v` are eigenvectors.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = 1e-12 * frobenius(a);
    let off = |m: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut converged = false;
    for _ in 0..100 {
        if off(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - s * vq;
                    v[q * n + k] = s * vp + c * vq;
                }
            }
        }
    }
    if !converged && off(&m) > threshold {
        return Err(Error::Numeric("Jacobi sweeps did not converge".into()));
    }
    let pairs = (0..n).map(|j| (m[j * n + j], v[j * n..(j + 1) * n].to_vec())).collect();
    Ok(SymEigResult::from_rows(n, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Normal;

    fn random_sym(n: usize, seed: u64) -> Vec<f64> {
        let mut g = Normal::from_seed(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = g.sample();
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    fn check_pairs(a: &[f64], r: &SymEigResult) {
        let n = r.n;
        let fro = frobenius(a);
        for j in 0..n {
            let v = r.vector(j);
            let mut res = 0.0;
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
                res += (av - r.values[j] * v[i]).powi(2);
            }
            assert!(res.sqrt() < 1e-10 * fro.max(1.0), "residual {}", res.sqrt());
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| r.vectors[k * n + i] * r.vectors[k * n + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
        for w in r.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_sorted_descending() {
        let a = [3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0];
        for r in [sym_eig(&a, 3).unwrap(), sym_eig_jacobi(&a, 3).unwrap()] {
            assert_eq!(r.values, vec![3.0, 2.0, 1.0]);
            assert!((r.vector(0)[0].abs() - 1.0).abs() < 1e-15);
            assert!((r.vector(1)[2].abs() - 1.0).abs() < 1e-15);
            assert!((r.vector(2)[1].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_by_two() {
        let r = sym_eig(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((r.values[0] - 3.0).abs() < 1e-14);
        assert!((r.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_matrices_both_solvers() {
        for (n, seed) in [(1, 1), (5, 2), (17, 3), (64, 4)] {
            let a = random_sym(n, seed);
            let ql = sym_eig(&a, n).unwrap();
            let jac = sym_eig_jacobi(&a, n).unwrap();
            check_pairs(&a, &ql);
            check_pairs(&a, &jac);
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            assert!((ql.values.iter().sum::<f64>() - trace).abs() < 1e-10 * (1.0 + trace.abs()));
            for (x, y) in ql.values.iter().zip(&jac.values) {
                assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn rejects_asymmetry() {
        let err = sym_eig(&[1.0, 2.0, 2.5, 1.0], 2).unwrap_err();
        match err {
            Error::Asymmetric { max_asymmetry } => assert!((max_asymmetry - 0.5).abs() < 1e-15),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        // u·uᵀ has one nonzero eigenvalue |u|².
        let u = [1.0, 2.0, -1.0, 0.5];
        let a: Vec<f64> = (0..16).map(|k| u[k / 4] * u[k % 4]).collect();
        let r = sym_eig(&a, 4).unwrap();
        assert!((r.values[0] - 6.25).abs() < 1e-12);
        assert!(r.values[1..].iter().all(|v| v.abs() < 1e-12));
        check_pairs(&a, &r);
    }
}
