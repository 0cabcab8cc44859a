//! Physical constants, unit scales and width conventions.
//!
//! Everything inside the crate runs in SI: frequencies in Hz, times in s,
//! wavelengths in m and the chirp parameter in s². The scales in [`units`]
//! exist for the I/O boundary only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Ratio between the intensity FWHM and the amplitude-RMS width of a
/// Gaussian field, `2 sqrt(ln 2)`.
pub const FWHM_PER_RMS: f64 = 1.665_109_222_315_395_5;

pub mod units {
    pub const HZ: f64 = 1.0;
    pub const KHZ: f64 = 1e3;
    pub const MHZ: f64 = 1e6;
    pub const GHZ: f64 = 1e9;
    pub const THZ: f64 = 1e12;

    pub const M: f64 = 1.0;
    pub const MM: f64 = 1e-3;
    pub const UM: f64 = 1e-6;
    pub const NM: f64 = 1e-9;
    pub const PM: f64 = 1e-12;

    pub const S: f64 = 1.0;
    pub const MS: f64 = 1e-3;
    pub const US: f64 = 1e-6;
    pub const NS: f64 = 1e-9;
    pub const PS: f64 = 1e-12;
    pub const FS: f64 = 1e-15;

    pub const S2: f64 = 1.0;
    pub const PS2: f64 = 1e-24;
    pub const FS2: f64 = 1e-30;

    /// Slope scale for wavelength-versus-delay, nm/ps in m/s.
    pub const NM_PER_PS: f64 = NM / PS;
    /// Slope scale for wavelength-versus-repetition-rate, nm/kHz in m/Hz.
    pub const NM_PER_KHZ: f64 = NM / KHZ;
}

/// ν = c/λ.
pub fn wavelength_to_frequency(wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::domain(format!("wavelength must be positive and finite, got {wavelength}")));
    }
    Ok(SPEED_OF_LIGHT / wavelength)
}

/// λ = c/ν.
pub fn frequency_to_wavelength(frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) || !frequency.is_finite() {
        return Err(Error::domain(format!("frequency must be positive and finite, got {frequency}")));
    }
    Ok(SPEED_OF_LIGHT / frequency)
}

/// Narrow-band conversion of a wavelength width to a frequency width,
/// `Δν = c Δλ / λ0²`.
pub fn bandwidth_wl_to_freq(width: f64, center_wavelength: f64) -> Result<f64> {
    if !(center_wavelength > 0.0) {
        return Err(Error::domain(format!("center wavelength must be positive, got {center_wavelength}")));
    }
    if !(width >= 0.0) {
        return Err(Error::domain(format!("wavelength width must be non-negative, got {width}")));
    }
    if width > center_wavelength / 2.0 {
        return Err(Error::domain(format!(
            "wavelength width {width:e} m exceeds half the center wavelength; narrow-band conversion invalid"
        )));
    }
    Ok(SPEED_OF_LIGHT * width / (center_wavelength * center_wavelength))
}

/// Inverse of [`bandwidth_wl_to_freq`], `Δλ = λ0² Δν / c`.
pub fn bandwidth_freq_to_wl(width: f64, center_wavelength: f64) -> Result<f64> {
    if !(center_wavelength > 0.0) {
        return Err(Error::domain(format!("center wavelength must be positive, got {center_wavelength}")));
    }
    if !(width >= 0.0) {
        return Err(Error::domain(format!("frequency width must be non-negative, got {width}")));
    }
    let dl = center_wavelength * center_wavelength * width / SPEED_OF_LIGHT;
    if dl > center_wavelength / 2.0 {
        return Err(Error::domain("frequency width too large for the narrow-band conversion"));
    }
    Ok(dl)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// Full width at half maximum of |E|².
    IntensityFwhm,
    /// σ of an amplitude Gaussian `exp(-x²/2σ²)`.
    AmplitudeRms,
}

/// A positive spectral width tagged with its convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Width {
    value: f64,
    convention: WidthConvention,
}

impl Width {
    pub fn new(value: f64, convention: WidthConvention) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::domain(format!("width must be positive and finite, got {value}")));
        }
        Ok(Width { value, convention })
    }

    pub fn fwhm(value: f64) -> Result<Self> {
        Width::new(value, WidthConvention::IntensityFwhm)
    }

    pub fn rms(value: f64) -> Result<Self> {
        Width::new(value, WidthConvention::AmplitudeRms)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn convention(&self) -> WidthConvention {
        self.convention
    }

    /// Re-express the width in `target`; a no-op when already there.
    pub fn convert(self, target: WidthConvention) -> Width {
        use WidthConvention::*;
        let value = match (self.convention, target) {
            (IntensityFwhm, AmplitudeRms) => self.value / FWHM_PER_RMS,
            (AmplitudeRms, IntensityFwhm) => self.value * FWHM_PER_RMS,
            _ => self.value,
        };
        Width { value, convention: target }
    }
}

/// A value with a 1-σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Estimate { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, sigma: 0.0 }
    }
}
