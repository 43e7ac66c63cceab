//! Golden coded multiple beamforming (GCMB) and its perfect-code extension
//! (PCMB).
//!
//! The crate covers the whole transmit/receive chain for a 2×2 MIMO link with
//! full channel knowledge at both ends:
//!
//! * [`numerics`]: small dense complex linear algebra (SVD, QR), square QAM
//!   constellations with Gray labels, and seeded random streams.
//! * [`golden`]: Golden Code encoding and the receive-side decoupling of
//!   `Y = ΛX + N` into four independent 2-dimensional real problems.
//! * [`lattice`]: an instrumented Schnorr–Euchner sphere decoder with
//!   last-layer rounding and an exhaustive ML reference.
//! * [`pstbc`]: the same machinery for perfect codes of dimension S.
//! * [`channel`]: quasi-static Rayleigh channels and the beamformed and plain
//!   MIMO transmission models.
//! * [`harness`]: Monte Carlo BER sweeps, diversity and SNR-gap estimates,
//!   node-count reports and the invariant checks behind `gcmb validate`.

pub mod channel;
pub mod error;
pub mod golden;
pub mod harness;
pub mod lattice;
pub mod numerics;
pub mod pstbc;

pub use error::{Error, Result};
