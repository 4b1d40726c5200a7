//! Iterative radix-2 FFT.
//!
//! Forward transforms use the `exp(-2πi⟨x,k⟩/n)` kernel; inverse transforms
//! use the conjugate kernel and divide by the number of points.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed bit-reversal permutation and twiddles for one length.
#[derive(Clone, Debug)]
pub struct FftPlan {
    n: usize,
    rev: Vec<usize>,
    twiddles: Vec<Complex64>,
}

impl FftPlan {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
        let bits = n.trailing_zeros();
        let rev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..n / 2)
            .map(|j| {
                let theta = -2.0 * std::f64::consts::PI * j as f64 / n as f64;
                Complex64::new(theta.cos(), theta.sin())
            })
            .collect();
        Self { n, rev, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.rev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let mut w = self.twiddles[j * step];
                    if inverse {
                        w = w.conj();
                    }
                    let u = data[start + j];
                    let t = w * data[start + j + half];
                    data[start + j] = u + t;
                    data[start + j + half] = u - t;
                }
            }
            len <<= 1;
        }
        if inverse {
            let scale = 1.0 / n as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }
}

/// A 2-D complex grid, row-major, with power-of-two extents.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSpectrum {
    pub shape: [usize; 2],
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn from_real(rows: usize, cols: usize, field: &[f64]) -> Self {
        Self {
            shape: [rows, cols],
            values: field.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.values[r * self.shape[1] + c]
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn check_extent(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        Err(Error::NotPowerOfTwo { extent: n })
    } else {
        Ok(())
    }
}

/// 2-D transform of a `rows × cols` grid.
pub fn fft2(input: &ComplexSpectrum, direction: Direction) -> Result<ComplexSpectrum> {
    let [rows, cols] = input.shape;
    check_extent(rows)?;
    check_extent(cols)?;
    if input.values.len() != rows * cols {
        return Err(Error::invalid(format!(
            "grid {rows}x{cols} needs {} values, got {}",
            rows * cols,
            input.values.len()
        )));
    }
    let inverse = direction == Direction::Inverse;
    let (rp, cp) = (FftPlan::new(cols), FftPlan::new(rows));
    let mut out = input.values.clone();
    for r in out.chunks_mut(cols) {
        rp.transform(r, inverse);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = out[r * cols + c];
        }
        cp.transform(&mut col, inverse);
        for r in 0..rows {
            out[r * cols + c] = col[r];
        }
    }
    Ok(ComplexSpectrum {
        shape: [rows, cols],
        values: out,
    })
}

/// Forward transform of a real field.
pub fn fft2_real(rows: usize, cols: usize, field: &[f64]) -> Result<ComplexSpectrum> {
    fft2(&ComplexSpectrum::from_real(rows, cols, field), Direction::Forward)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Normal;

    /// Direct O(M²) DFT with the same sign convention.
    fn naive_dft(x: &ComplexSpectrum) -> Vec<Complex64> {
        let [r, c] = x.shape;
        let mut out = vec![Complex64::new(0.0, 0.0); r * c];
        for kr in 0..r {
            for kc in 0..c {
                let mut acc = Complex64::new(0.0, 0.0);
                for y in 0..r {
                    for z in 0..c {
                        let th = -2.0
                            * std::f64::consts::PI
                            * ((kr * y) as f64 / r as f64 + (kc * z) as f64 / c as f64);
                        acc += x.get(y, z) * Complex64::new(th.cos(), th.sin());
                    }
                }
                out[kr * c + kc] = acc;
            }
        }
        out
    }

    #[test]
    fn delta_gives_flat_spectrum() {
        let mut f = vec![0.0; 16];
        f[0] = 1.0;
        let s = fft2_real(4, 4, &f).unwrap();
        for v in &s.values {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_field_concentrates_at_zero_mode() {
        let s = fft2_real(8, 4, &[2.5; 32]).unwrap();
        assert!((s.values[0] - Complex64::new(80.0, 0.0)).norm() < 1e-12);
        assert!(s.values[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn matches_direct_dft() {
        let mut n = Normal::from_seed(11);
        let f: Vec<f64> = (0..32).map(|_| n.sample()).collect();
        let x = ComplexSpectrum::from_real(4, 8, &f);
        let fast = fft2(&x, Direction::Forward).unwrap();
        for (a, b) in fast.values.iter().zip(naive_dft(&x)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_8x8() {
        let mut n = Normal::from_seed(5);
        let f: Vec<f64> = (0..64).map(|_| n.sample()).collect();
        let s = fft2_real(8, 8, &f).unwrap();
        let back = fft2(&s, Direction::Inverse).unwrap();
        let err = back
            .values
            .iter()
            .zip(&f)
            .map(|(a, b)| (a - Complex64::new(*b, 0.0)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            fft2_real(6, 4, &[0.0; 24]),
            Err(Error::NotPowerOfTwo { extent: 6 })
        ));
        assert!(fft2_real(1, 4, &[0.0; 4]).is_err());
    }
}
