//! Deterministic numerical kernels: symmetric eigensolvers, truncated SVD,
//! radix-2 FFT and Gauss–Legendre quadrature.

pub mod eig;
pub mod fft;
pub mod quad;
pub mod svd;

pub use eig::{sym_eig, sym_eig_jacobi, SymEigResult};
pub use fft::{fft2, fft2_real, ComplexSpectrum, Direction, FftPlan};
pub use quad::{gauss_legendre, GaussLegendre};
pub use svd::{truncated_svd, TruncatedSvd};
