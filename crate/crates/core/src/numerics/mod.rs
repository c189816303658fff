//! Scalar and matrix arithmetic shared by the rest of the crate.

mod matrix;
mod poly;
mod scalar;
mod spectral;

pub use matrix::Matrix;
pub use poly::{bracket_root, char_poly, IntPolynomial, RootBracket};
pub use scalar::{ln_bigint, LogFloat, Mode, Scalar};
pub use spectral::{spectral_radius, spectral_radius_with_cap, SpectralInterval, DEFAULT_MAX_ITERATIONS};
