//! Spectral compression of broadband single photons by sum-frequency
//! generation with an oppositely chirped laser pulse.
//!
//! All quantities are SI: frequencies in Hz, times in s, wavelengths in m and
//! spectral chirps in s². Phase convention for a pulse centred at ν0 with
//! delay τ and chirp A: `φ(ν) = 2π(ν - ν0)τ + A(ν - ν0)²`.

pub mod error;
pub mod quantities;
pub mod pulses;
pub mod sfg_analytic;
pub mod sfg_numeric;
pub mod entanglement;
pub mod timing_sync;
pub mod spectro_analysis;
pub mod cli;

pub use error::{Error, Result};
