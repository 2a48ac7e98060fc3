//! Bit-flipping decoding for QC-MDPC codes with layered scheduling.
//!
//! * [`gf2`]: keys, error sampling, syndromes over `H = [H0 | H1]`.
//! * [`threshold`]: the affine threshold, its per-iteration schedule and
//!   fixed-point truncation of the coefficients.
//! * [`decoder`]: the fixed-iteration decoder, from non-layered to
//!   column-layered via the block size.
//! * [`calibration`]: least-squares derivation of threshold coefficients.
//! * [`dfr`]: Monte Carlo failure rates and extrapolation in `r`.
//! * [`cost`]: memory, latency and area of `L`-parallel hardware.

pub mod bitvec;
pub mod calibration;
pub mod cost;
pub mod decoder;
pub mod dfr;
pub mod error;
pub mod fixture;
pub mod gf2;
pub mod params;
pub mod rng;
pub mod threshold;

pub use bitvec::BitVector;
pub use decoder::{decode, decode_and_check, decode_observed, DecodeOutcome};
pub use error::{Error, Result};
pub use gf2::SparseKey;
pub use params::{CodeParams, DecoderConfig, Schedule};
pub use threshold::{Precision, ThresholdCoefficients};
