//! Decoherence of single surface plasmon polaritons in stripe waveguides.
//!
//! The crate simulates the two measurements used to characterize plasmon
//! decoherence (intensity decay versus waveguide length, and interference
//! fringes of a Mach-Zehnder interferometer with the waveguide in one arm) and
//! runs the extraction pipeline that recovers the damping rates from them:
//!
//! * [`channels`] – amplitude and pure phase damping on the single-excitation subspace.
//! * [`mzi`] – detection-probability models for each interferometer variant.
//! * [`dispersion`] – GVD coefficient, wavepacket broadening and spectral overlap.
//! * [`simkit`] – seeded synthetic decay scans, fringe scans and heralded g²(0) records.
//! * [`estimate`] – decay fit, fringe fit with Monte-Carlo errors, line fit and summary.
//! * [`cli`] – configuration, file formats and the `simulate`/`fit`/`pipeline`/`report` commands.
//!
//! Each capability has a runnable program under `examples/`.

pub mod channels;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod estimate;
pub mod mzi;
pub mod simkit;

pub use error::{Error, Result};
