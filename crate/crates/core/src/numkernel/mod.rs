//! Numerical primitives shared by the analytic and brute-force paths.

mod bessel;
mod hermitian;

pub use bessel::{scaled_bessel_i, ScaledBesselTable};
pub use hermitian::{hermitian_eigenvalues, positive_part_sum, HermitianMatrix};

pub type C64 = num_complex::Complex64;
