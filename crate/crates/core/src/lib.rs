//! Optical protection of alkali ground-state spin coherence.
//!
//! A far-detuned, circularly polarized beam shifts the Zeeman splittings of
//! the two hyperfine manifolds by different amounts. At the resonance power
//! the two splittings become equal and the spin-exchange decoherence between
//! them is suppressed. The crate models this with a two-manifold
//! hyperfine-Bloch system and provides:
//!
//! - [`lightshift`]: vector light-shift cross-sections, beam calibration and
//!   the resonance condition,
//! - [`bloch`]: the relaxation matrix, closed-form eigenmodes and propagator,
//! - [`signal`]: synthetic traces, spectra and multi-exponential sinusoid fits,
//! - [`sweep`]: relaxation-rate and Q maps over field and power grids,
//! - [`cli`]: the `spinsync` command-line front end.

pub mod angular;
pub mod bloch;
pub mod cli;
pub mod config;
pub mod error;
pub mod lightshift;
pub mod rng;
pub mod scenario;
pub mod signal;
pub mod species;
pub mod sweep;
pub mod units;

pub use error::{Error, Result};
