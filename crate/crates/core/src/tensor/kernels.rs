//! Raw numeric kernels behind the tape operations. These work on slices and
//! assume shapes were validated by the caller.

use num_complex::Complex64;

use crate::linalg::fft::FftPlan;

/// Inner dimensions at or below this use a plain left-to-right dot product.
const DIRECT_INNER_MAX: usize = 16;

pub fn broadcast_shape(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    let rank = a.len().max(b.len());
    let mut out = vec![0; rank];
    for i in 0..rank {
        let da = if i + a.len() >= rank { a[i + a.len() - rank] } else { 1 };
        let db = if i + b.len() >= rank { b[i + b.len() - rank] } else { 1 };
        out[i] = match (da, db) {
            (x, y) if x == y => x,
            (1, y) => y,
            (x, 1) => x,
            _ => return None,
        };
    }
    Some(out)
}

/// Strides of `shape` laid into `out_shape`, zero on broadcast axes.
fn broadcast_strides(shape: &[usize], out_shape: &[usize]) -> Vec<usize> {
    let rank = out_shape.len();
    let mut strides = vec![0; rank];
    let mut acc = 1;
    for i in (0..shape.len()).rev() {
        let o = i + rank - shape.len();
        strides[o] = if shape[i] == 1 { 0 } else { acc };
        acc *= shape[i];
    }
    strides
}

/// Maps every flat output index to the flat index of a broadcast operand.
fn for_each_broadcast(out_shape: &[usize], strides: &[usize], mut f: impl FnMut(usize, usize)) {
    let n: usize = out_shape.iter().product();
    let rank = out_shape.len();
    let mut idx = vec![0usize; rank];
    let mut src = 0usize;
    for o in 0..n {
        f(o, src);
        for ax in (0..rank).rev() {
            idx[ax] += 1;
            src += strides[ax];
            if idx[ax] < out_shape[ax] {
                break;
            }
            src -= strides[ax] * idx[ax];
            idx[ax] = 0;
        }
    }
}

pub fn binary(
    a: &[f64],
    a_shape: &[usize],
    b: &[f64],
    b_shape: &[usize],
    out_shape: &[usize],
    f: impl Fn(f64, f64) -> f64,
) -> Vec<f64> {
    if a_shape == b_shape {
        return a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect();
    }
    if b.len() == 1 && a_shape == out_shape {
        let y = b[0];
        return a.iter().map(|&x| f(x, y)).collect();
    }
    if a_shape == out_shape && a.len() % b.len() == 0 && is_suffix(b_shape, a_shape) {
        let w = b.len();
        return a
            .iter()
            .enumerate()
            .map(|(i, &x)| f(x, b[i % w]))
            .collect();
    }
    let sa = broadcast_strides(a_shape, out_shape);
    let sb = broadcast_strides(b_shape, out_shape);
    let n: usize = out_shape.iter().product();
    let mut ia = Vec::with_capacity(n);
    for_each_broadcast(out_shape, &sa, |_, s| ia.push(s));
    let mut out = vec![0.0; n];
    for_each_broadcast(out_shape, &sb, |o, s| out[o] = f(a[ia[o]], b[s]));
    out
}

fn is_suffix(short: &[usize], long: &[usize]) -> bool {
    let short: Vec<usize> = short.iter().copied().skip_while(|&e| e == 1).collect();
    short.len() <= long.len() && long[long.len() - short.len()..] == short[..]
}

/// Sums a gradient of `out_shape` down to a broadcast operand's shape.
pub fn reduce_to(g: &[f64], out_shape: &[usize], shape: &[usize]) -> Vec<f64> {
    let n: usize = shape.iter().product();
    if out_shape == shape {
        return g.to_vec();
    }
    let mut out = vec![0.0; n];
    if n == 1 {
        out[0] = g.iter().sum();
        return out;
    }
    if is_suffix(shape, out_shape) {
        for (i, &v) in g.iter().enumerate() {
            out[i % n] += v;
        }
        return out;
    }
    let s = broadcast_strides(shape, out_shape);
    for_each_broadcast(out_shape, &s, |o, src| out[src] += g[o]);
    out
}

/// `C = op(A)·op(B)` for row-major `A` (m×k after op) and `B` (k×n after op).
/// `ta`/`tb` select the transposed view of the stored matrix.
#[allow(clippy::too_many_arguments)]
pub fn matmul(
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    n: usize,
    ta: bool,
    tb: bool,
    c: &mut [f64],
    accumulate: bool,
) {
    // Row/column strides of the logical (possibly transposed) operands.
    let (rsa, csa) = if ta { (1, m) } else { (k, 1) };
    let (rsb, csb) = if tb { (1, k) } else { (n, 1) };
    if k <= DIRECT_INNER_MAX {
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for p in 0..k {
                    acc += a[i * rsa + p * csa] * b[p * rsb + j * csb];
                }
                let dst = &mut c[i * n + j];
                if accumulate {
                    *dst += acc;
                } else {
                    *dst = acc;
                }
            }
        }
        return;
    }
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: slices cover m*k, k*n and m*n elements under the given strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

pub fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for i in 0..rows {
        for j in 0..cols {
            out[j * rows + i] = a[i * cols + j];
        }
    }
    out
}

/// Geometry of a stride-1, size-preserving 2-D convolution.
#[derive(Clone, Copy, Debug)]
pub struct ConvDims {
    pub batch: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub h: usize,
    pub w: usize,
    pub kh: usize,
    pub kw: usize,
}

impl ConvDims {
    fn patch(&self) -> usize {
        self.c_in * self.kh * self.kw
    }
    fn hw(&self) -> usize {
        self.h * self.w
    }
}

fn im2col(x: &[f64], d: &ConvDims, cols: &mut [f64]) {
    let (ph, pw) = (d.kh / 2, d.kw / 2);
    let hw = d.hw();
    for c in 0..d.c_in {
        let plane = &x[c * hw..(c + 1) * hw];
        for ky in 0..d.kh {
            for kx in 0..d.kw {
                let row = (c * d.kh + ky) * d.kw + kx;
                let dst = &mut cols[row * hw..(row + 1) * hw];
                for y in 0..d.h {
                    let sy = y as isize + ky as isize - ph as isize;
                    for xx in 0..d.w {
                        let sx = xx as isize + kx as isize - pw as isize;
                        dst[y * d.w + xx] = if sy >= 0
                            && sx >= 0
                            && (sy as usize) < d.h
                            && (sx as usize) < d.w
                        {
                            plane[sy as usize * d.w + sx as usize]
                        } else {
                            0.0
                        };
                    }
                }
            }
        }
    }
}

fn col2im(cols: &[f64], d: &ConvDims, x: &mut [f64]) {
    let (ph, pw) = (d.kh / 2, d.kw / 2);
    let hw = d.hw();
    for c in 0..d.c_in {
        for ky in 0..d.kh {
            for kx in 0..d.kw {
                let row = (c * d.kh + ky) * d.kw + kx;
                let src = &cols[row * hw..(row + 1) * hw];
                for y in 0..d.h {
                    let sy = y as isize + ky as isize - ph as isize;
                    if sy < 0 || sy as usize >= d.h {
                        continue;
                    }
                    for xx in 0..d.w {
                        let sx = xx as isize + kx as isize - pw as isize;
                        if sx >= 0 && (sx as usize) < d.w {
                            x[c * hw + sy as usize * d.w + sx as usize] += src[y * d.w + xx];
                        }
                    }
                }
            }
        }
    }
}

pub fn conv2d_forward(x: &[f64], k: &[f64], d: &ConvDims) -> Vec<f64> {
    let (hw, patch) = (d.hw(), d.patch());
    let mut out = vec![0.0; d.batch * d.c_out * hw];
    let pointwise = d.kh == 1 && d.kw == 1;
    let mut cols = if pointwise { Vec::new() } else { vec![0.0; patch * hw] };
    for b in 0..d.batch {
        let xb = &x[b * d.c_in * hw..(b + 1) * d.c_in * hw];
        let src: &[f64] = if pointwise {
            xb
        } else {
            im2col(xb, d, &mut cols);
            &cols
        };
        let ob = &mut out[b * d.c_out * hw..(b + 1) * d.c_out * hw];
        matmul(k, src, d.c_out, patch, hw, false, false, ob, false);
    }
    out
}

/// Returns `(grad_input, grad_kernel)`; the input gradient is skipped when
/// `need_input` is false.
pub fn conv2d_backward(
    x: &[f64],
    k: &[f64],
    g: &[f64],
    d: &ConvDims,
    need_input: bool,
) -> (Option<Vec<f64>>, Vec<f64>) {
    let (hw, patch) = (d.hw(), d.patch());
    let pointwise = d.kh == 1 && d.kw == 1;
    let mut gk = vec![0.0; d.c_out * patch];
    let mut gx = need_input.then(|| vec![0.0; x.len()]);
    let mut cols = if pointwise { Vec::new() } else { vec![0.0; patch * hw] };
    let mut gcols = vec![0.0; patch * hw];
    for b in 0..d.batch {
        let xb = &x[b * d.c_in * hw..(b + 1) * d.c_in * hw];
        let gb = &g[b * d.c_out * hw..(b + 1) * d.c_out * hw];
        let src: &[f64] = if pointwise {
            xb
        } else {
            im2col(xb, d, &mut cols);
            &cols
        };
        // dK += dY · colsᵀ
        matmul(gb, src, d.c_out, hw, patch, false, true, &mut gk, true);
        if let Some(gx) = gx.as_mut() {
            // dcols = Kᵀ · dY
            matmul(k, gb, patch, d.c_out, hw, true, false, &mut gcols, false);
            let gxb = &mut gx[b * d.c_in * hw..(b + 1) * d.c_in * hw];
            if pointwise {
                for (dst, v) in gxb.iter_mut().zip(&gcols) {
                    *dst += v;
                }
            } else {
                col2im(&gcols, d, gxb);
            }
        }
    }
    (gx, gk)
}

/// Geometry of a truncated spectral convolution. Retained rows/columns are
/// the signed frequencies `-modes..modes` along each axis.
#[derive(Clone, Copy, Debug)]
pub struct SpectralDims {
    pub batch: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub h: usize,
    pub w: usize,
    pub modes: usize,
}

impl SpectralDims {
    /// Spectrum index for the `r`-th retained frequency along an axis of length `n`.
    fn freq_index(&self, r: usize, n: usize) -> usize {
        if r < self.modes {
            r
        } else {
            n - 2 * self.modes + r
        }
    }
    fn kept(&self) -> usize {
        2 * self.modes
    }
}

fn fft2_planes(
    data: &mut [Complex64],
    d: &SpectralDims,
    row_plan: &FftPlan,
    col_plan: &FftPlan,
    inverse: bool,
) {
    let hw = d.h * d.w;
    let mut col = vec![Complex64::new(0.0, 0.0); d.h];
    for plane in data.chunks_mut(hw) {
        for r in plane.chunks_mut(d.w) {
            row_plan.transform(r, inverse);
        }
        for c in 0..d.w {
            for y in 0..d.h {
                col[y] = plane[y * d.w + c];
            }
            col_plan.transform(&mut col, inverse);
            for y in 0..d.h {
                plane[y * d.w + c] = col[y];
            }
        }
    }
}

fn spectrum_of(x: &[f64], d: &SpectralDims, rp: &FftPlan, cp: &FftPlan, inverse: bool) -> Vec<Complex64> {
    let mut s: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft2_planes(&mut s, d, rp, cp, inverse);
    s
}

/// Weight layout: `[kept_rows, kept_cols, c_in, c_out]`, real and imaginary
/// parts in separate buffers.
pub fn spectral_forward(x: &[f64], w_re: &[f64], w_im: &[f64], d: &SpectralDims) -> Vec<f64> {
    let (rp, cp) = (FftPlan::new(d.w), FftPlan::new(d.h));
    let hw = d.h * d.w;
    let kept = d.kept();
    let mut out = vec![0.0; d.batch * d.c_out * hw];
    let zero = Complex64::new(0.0, 0.0);
    for b in 0..d.batch {
        let xs = spectrum_of(&x[b * d.c_in * hw..(b + 1) * d.c_in * hw], d, &rp, &cp, false);
        let mut ys = vec![zero; d.c_out * hw];
        for r in 0..kept {
            let fy = d.freq_index(r, d.h);
            for c in 0..kept {
                let fx = d.freq_index(c, d.w);
                let base = (r * kept + c) * d.c_in * d.c_out;
                for i in 0..d.c_in {
                    let xv = xs[i * hw + fy * d.w + fx];
                    for o in 0..d.c_out {
                        let wi = base + i * d.c_out + o;
                        ys[o * hw + fy * d.w + fx] += Complex64::new(w_re[wi], w_im[wi]) * xv;
                    }
                }
            }
        }
        fft2_planes(&mut ys, d, &rp, &cp, true);
        for (dst, v) in out[b * d.c_out * hw..(b + 1) * d.c_out * hw].iter_mut().zip(&ys) {
            *dst = v.re;
        }
    }
    out
}

/// Returns `(grad_input, grad_w_re, grad_w_im)`.
pub fn spectral_backward(
    x: &[f64],
    w_re: &[f64],
    w_im: &[f64],
    g: &[f64],
    d: &SpectralDims,
    need_input: bool,
) -> (Option<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let (rp, cp) = (FftPlan::new(d.w), FftPlan::new(d.h));
    let hw = d.h * d.w;
    let kept = d.kept();
    let zero = Complex64::new(0.0, 0.0);
    let mut gre = vec![0.0; w_re.len()];
    let mut gim = vec![0.0; w_im.len()];
    let mut gx = need_input.then(|| vec![0.0; x.len()]);
    for b in 0..d.batch {
        let xs = spectrum_of(&x[b * d.c_in * hw..(b + 1) * d.c_in * hw], d, &rp, &cp, false);
        // Inverse transform of the upstream gradient (includes the 1/M factor).
        let gs = spectrum_of(&g[b * d.c_out * hw..(b + 1) * d.c_out * hw], d, &rp, &cp, true);
        let mut zs = vec![zero; d.c_in * hw];
        for r in 0..kept {
            let fy = d.freq_index(r, d.h);
            for c in 0..kept {
                let fx = d.freq_index(c, d.w);
                let k = fy * d.w + fx;
                let base = (r * kept + c) * d.c_in * d.c_out;
                for i in 0..d.c_in {
                    let xv = xs[i * hw + k];
                    let mut z = zero;
                    for o in 0..d.c_out {
                        let wi = base + i * d.c_out + o;
                        let gv = gs[o * hw + k];
                        let p = xv * gv;
                        gre[wi] += p.re;
                        gim[wi] -= p.im;
                        z += Complex64::new(w_re[wi], w_im[wi]) * gv;
                    }
                    zs[i * hw + k] = z;
                }
            }
        }
        if let Some(gx) = gx.as_mut() {
            fft2_planes(&mut zs, d, &rp, &cp, false);
            for (dst, v) in gx[b * d.c_in * hw..(b + 1) * d.c_in * hw].iter_mut().zip(&zs) {
                *dst += v.re;
            }
        }
    }
    (gx, gre, gim)
}
