//! Dense linear algebra, seeded random streams and spectra used by the rest
//! of the crate. Everything is `f64`.

mod eigen;
mod fft;
mod linalg;
mod matrix;
mod rng;

pub use eigen::eigenvalues;
pub use fft::{fft_magnitudes, fft_magnitudes_with, Spectrum};
pub use linalg::{
    operator_norm_2, qr_orthogonal, rescale_to_rho, ridge_solve, spectral_radius, uniform_matrix,
    PINV_RCOND,
};
pub use matrix::{dot, l2_distance, l2_norm, Matrix};
pub use rng::{derive_seed, RngStream};
