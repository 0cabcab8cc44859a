//! Gaussian pulse descriptions, frequency grids and sampled spectral
//! amplitudes.
//!
//! A pulse is described in the frequency domain by
//!
//! ```text
//! E(ν) = exp(-2 ln2 (ν-ν0)²/Δν²) · exp(i [2π (ν-ν0) τ + A (ν-ν0)²])
//! ```
//!
//! with Δν the intensity FWHM, τ a delay and A the chirp in s². Positive A
//! makes the instantaneous frequency rise in time at the rate π/A.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod fit;
mod measure;
mod time;

pub use fit::{fit_gaussian, GaussianFit};
pub use measure::{centroid, measure_fwhm, measure_peak, Peak};
pub use time::{time_envelope, TimeEnvelope};

/// Default number of samples for an input grid.
pub const DEFAULT_INPUT_POINTS: usize = 1 << 13;

/// A grid carries a pulse over `±SPAN_HALF_WIDTHS` FWHM around its centre.
pub const SPAN_HALF_WIDTHS: f64 = 4.0;

const MIN_GRID_POINTS: usize = 16;

/// Gaussian field description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Centre frequency, Hz.
    pub nu0: f64,
    /// Intensity FWHM, Hz.
    pub fwhm: f64,
    /// Quadratic spectral phase coefficient A, s².
    pub chirp: f64,
    /// Delay τ, s.
    pub delay: f64,
}

impl PulseSpec {
    pub fn new(nu0: f64, fwhm: f64, chirp: f64, delay: f64) -> Result<Self> {
        let spec = PulseSpec { nu0, fwhm, chirp, delay };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu0 > 0.0) || !self.nu0.is_finite() {
            return Err(Error::validation(format!("centre frequency must be positive, got {}", self.nu0)));
        }
        if !(self.fwhm > 0.0) || !self.fwhm.is_finite() {
            return Err(Error::validation(format!("FWHM must be positive, got {}", self.fwhm)));
        }
        if !self.chirp.is_finite() || !self.delay.is_finite() {
            return Err(Error::validation("chirp and delay must be finite"));
        }
        Ok(())
    }

    pub fn with_delay(self, delay: f64) -> Self {
        PulseSpec { delay, ..self }
    }

    pub fn with_chirp(self, chirp: f64) -> Self {
        PulseSpec { chirp, ..self }
    }

    pub fn with_fwhm(self, fwhm: f64) -> Self {
        PulseSpec { fwhm, ..self }
    }

    /// Analytic field amplitude at `nu`.
    pub fn amplitude(&self, nu: f64) -> Complex64 {
        let x = nu - self.nu0;
        let envelope = (-2.0 * LN_2 * x * x / (self.fwhm * self.fwhm)).exp();
        let phase = 2.0 * PI * x * self.delay + self.chirp * x * x;
        Complex64::from_polar(envelope, phase)
    }
}

/// Uniform frequency sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(Error::validation(format!("grid step must be positive and finite, got {step}")));
        }
        if count < MIN_GRID_POINTS {
            return Err(Error::validation(format!("grid needs at least {MIN_GRID_POINTS} points, got {count}")));
        }
        Ok(FrequencyGrid { start, step, count })
    }

    /// `count` points over `span`, centred on `center`.
    pub fn centered(center: f64, span: f64, count: usize) -> Result<Self> {
        if count < MIN_GRID_POINTS {
            return Err(Error::validation(format!("grid needs at least {MIN_GRID_POINTS} points, got {count}")));
        }
        let step = span / (count - 1) as f64;
        FrequencyGrid::new(center - span / 2.0, step, count)
    }

    /// Grid of `count` points with `center` landing exactly on index `count/2`.
    pub fn anchored(center: f64, step: f64, count: usize) -> Result<Self> {
        FrequencyGrid::new(center - (count / 2) as f64 * step, step, count)
    }

    /// Smallest adequate grid for `spec` with at least `min_points` samples
    /// (a power of two when `min_points` is one).
    ///
    /// The count doubles until the phase-resolution rule holds; the centre
    /// frequency sits exactly on a sample.
    pub fn for_pulse(spec: &PulseSpec, min_points: usize) -> Result<Self> {
        spec.validate()?;
        let half = SPAN_HALF_WIDTHS * spec.fwhm;
        let mut count = min_points.max(MIN_GRID_POINTS);
        loop {
            let step = half / (count / 2 - 1) as f64;
            let grid = FrequencyGrid::anchored(spec.nu0, step, count)?;
            if check_grid(spec, &grid).is_ok() {
                return Ok(grid);
            }
            if count > 1 << 26 {
                return Err(Error::GridPrecondition(format!(
                    "no grid below 2^26 points resolves chirp {:e} s² over ±{half:e} Hz",
                    spec.chirp
                )));
            }
            count *= 2;
        }
    }

    pub fn frequency(&self, index: usize) -> f64 {
        self.start + index as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.frequency(self.count - 1)
    }

    pub fn span(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.start + self.end())
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.frequency(k))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.frequencies().collect()
    }

    pub fn nearest_index(&self, nu: f64) -> usize {
        let k = ((nu - self.start) / self.step).round();
        k.clamp(0.0, (self.count - 1) as f64) as usize
    }

    /// Same span at half the step.
    pub fn refined(&self) -> FrequencyGrid {
        FrequencyGrid { start: self.start, step: self.step / 2.0, count: 2 * self.count - 1 }
    }

    pub fn same_sampling(&self, other: &FrequencyGrid) -> bool {
        self.count == other.count && ((self.step - other.step) / self.step).abs() < 1e-12
    }
}

/// Largest step that keeps the chirp phase resolved at `half_span` from the
/// centre: `π / (8 |A| half_span)`.
pub fn phase_resolution_limit(chirp: f64, half_span: f64) -> f64 {
    if chirp == 0.0 {
        f64::INFINITY
    } else {
        PI / (8.0 * chirp.abs() * half_span)
    }
}

/// Check the span and phase-resolution rules for carrying `spec` on `grid`.
pub fn check_grid(spec: &PulseSpec, grid: &FrequencyGrid) -> Result<()> {
    let half = SPAN_HALF_WIDTHS * spec.fwhm;
    let tol = 1e-9 * spec.fwhm;
    let lo = spec.nu0 - half;
    let hi = spec.nu0 + half;
    if grid.start > lo + tol || grid.end() < hi - tol {
        return Err(Error::GridPrecondition(format!(
            "grid [{:.6e}, {:.6e}] Hz does not cover [{lo:.6e}, {hi:.6e}] Hz (±{SPAN_HALF_WIDTHS} FWHM of {:.4e} Hz)",
            grid.start,
            grid.end(),
            spec.fwhm
        )));
    }
    let half_span = (spec.nu0 - grid.start).max(grid.end() - spec.nu0);
    let limit = phase_resolution_limit(spec.chirp, half_span);
    if !(grid.step < limit) {
        let needed = (2.0 * half_span / limit).ceil() as usize + 1;
        return Err(Error::GridPrecondition(format!(
            "grid step {:.4e} Hz under-resolves chirp {:.4e} s²: need step < {limit:.4e} Hz, i.e. more than {needed} points over the current span",
            grid.step, spec.chirp
        )));
    }
    Ok(())
}

/// Sampled complex spectral amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAmplitude {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl SpectralAmplitude {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::validation(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        Ok(SpectralAmplitude { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn intensity(&self) -> Spectrum {
        Spectrum {
            grid: self.grid,
            values: self.values.iter().map(|v| v.norm_sqr()).collect(),
        }
    }

    /// Copy scaled to unit peak intensity.
    pub fn normalized(&self) -> SpectralAmplitude {
        let peak = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
        SpectralAmplitude {
            grid: self.grid,
            values: self.values.iter().map(|v| v * scale).collect(),
        }
    }

    /// Σ |E|² · step.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step
    }
}

/// Real sampled spectrum on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn peak_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn normalized(&self) -> Spectrum {
        let peak = self.peak_value();
        let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
        Spectrum { grid: self.grid, values: self.values.iter().map(|v| v * scale).collect() }
    }

    pub fn fwhm(&self) -> Result<f64> {
        measure_fwhm(&self.grid.to_vec(), &self.values)
    }

    pub fn peak(&self) -> Result<Peak> {
        measure_peak(&self.grid.to_vec(), &self.values)
    }

    /// Fraction of the sampled energy held in the outer sixteenth of the
    /// window on both sides. For spectra that decay monotonically towards
    /// the edges this bounds the energy lost beyond the window.
    pub fn edge_energy_fraction(&self) -> f64 {
        let n = self.values.len();
        let slab = (n / 16).max(1);
        let total: f64 = self.values.iter().sum();
        if !(total > 0.0) {
            return 1.0;
        }
        let edges: f64 = self.values[..slab].iter().chain(&self.values[n - slab..]).sum();
        edges / total
    }
}

/// Sample `spec` on `grid` after checking the grid adequacy rules.
pub fn synthesize(spec: &PulseSpec, grid: &FrequencyGrid) -> Result<SpectralAmplitude> {
    spec.validate()?;
    check_grid(spec, grid)?;
    let values = grid.frequencies().map(|nu| spec.amplitude(nu)).collect();
    SpectralAmplitude::new(*grid, values)
}

/// Sample `spec` on its default adequate grid.
pub fn synthesize_default(spec: &PulseSpec, min_points: usize) -> Result<SpectralAmplitude> {
    let grid = FrequencyGrid::for_pulse(spec, min_points)?;
    synthesize(spec, &grid)
}
