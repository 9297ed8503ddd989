//! Sound field reproduction over arbitrary loudspeaker arrays.
//!
//! The crate estimates spherical-wavefunction expansions of loudspeaker
//! transfer functions and desired fields from scattered microphone data,
//! computes driving signals with regularised pressure matching or weighted
//! mode matching, turns them into FIR filters, and scores the reproduced
//! field with a signal-to-distortion ratio.
//!
//! Module map:
//!
//! * [`specfun`]: spherical Bessel/Hankel functions, Legendre functions,
//!   spherical harmonics, Wigner 3j and Gaunt coefficients.
//! * [`wavefield`]: wavefunction expansions, analytic fields, translation.
//! * [`scene`]: loudspeakers, microphones, target regions, quadrature and
//!   the on-disk impulse-response dataset format.
//! * [`estimation`]: coefficient estimation from arbitrarily placed microphones.
//! * [`reproduction`]: pressure matching and (weighted) mode matching.
//! * [`broadband`]: frequency grid, filter design, pulse rendering and SDR.
//! * [`cli`]: experiment configs and the batch driver behind the binary.

pub mod broadband;
pub mod cli;
pub mod error;
pub mod estimation;
mod linalg;
pub mod reproduction;
pub mod scene;
pub mod specfun;
pub mod wavefield;

pub use error::{Error, ErrorKind, Result};
pub use specfun::{HarmonicIndex, Wavenumber};
pub use wavefield::{ExpansionCoefficients, Vec3};
