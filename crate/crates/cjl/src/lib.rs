//! Circulant Johnson-Lindenstrauss sketching with verified tail bounds.

// Parameter validation deliberately writes `!(x > 0.0)` rather than
// `x <= 0.0`: the negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod circulant;
pub mod decoupling;
pub mod eigen;
pub mod embedder;
pub mod error;
pub mod fft;
pub mod mat;
pub mod montecarlo;
pub mod prng;

pub use error::{Error, Result};
