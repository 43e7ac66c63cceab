//! Linear algebra, constellations and random streams shared by the codecs.

mod constellation;
mod matrix;
mod qr;
mod rng;
mod svd;

pub use constellation::Constellation;
pub use matrix::{inner, vec_norm_sqr, ComplexMatrix, I};
pub use qr::{qr, QrFactors};
pub use rng::SeededRng;
pub use svd::{svd, SvdFactors};

pub use num_complex::Complex64;
