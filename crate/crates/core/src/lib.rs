//! Spatial-modulation MIMO detection toolkit.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: Pochhammer symbol, Kummer ₁F₁, integer-order Marcum Q,
//!   noncentral chi-square CDF and Gauss–Laguerre rules.
//! * [`model`]: Gray-labelled QAM, bit/message mapping, Rayleigh channel,
//!   AWGN and the candidate set `x_j = h_a s_m`.
//! * [`decoders`]: exhaustive ML, the reliable sphere decoder (best-first
//!   search over a reduced tree) and its exhaustive reference.
//! * [`analysis`]: union-bound BER, miss-probability estimation and the
//!   expected visited-node complexity (closed form and quadrature).
//! * [`harness`]: JSON-driven Monte Carlo sweeps, theory curves, CSV output
//!   and the simulation/theory comparison report.

pub mod analysis;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod model;
pub mod numerics;
pub mod streams;

pub use error::{Error, Result};
