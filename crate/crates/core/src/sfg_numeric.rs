//! Direct numerical evaluation of the upconverted field.
//!
//! The output amplitude is the frequency-domain convolution
//!
//! ```text
//! E(ν3) = ∫ E_P(ν) E_L(ν3 - ν) dν
//! ```
//!
//! evaluated by trapezoidal quadrature over the photon samples, with the
//! laser amplitude linearly interpolated on its own grid. Nothing here uses
//! the closed forms of [`crate::sfg_analytic`] except to place the output
//! window.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{
    measure_fwhm, measure_peak, synthesize, FrequencyGrid, PulseSpec, SpectralAmplitude, Spectrum,
    DEFAULT_INPUT_POINTS, SPAN_HALF_WIDTHS,
};
use crate::quantities::frequency_to_wavelength;
use crate::sfg_analytic::bandwidth_general;

/// Largest fraction of the output energy the window may clip.
pub const WINDOW_CLIP_LIMIT: f64 = 1e-6;

/// Default number of output samples.
pub const DEFAULT_OUTPUT_POINTS: usize = 1 << 12;

/// Output samples evaluated together in [`upconvert_raw`].
const CONVOLUTION_BLOCK: usize = 32;

/// The default output window spans this many predicted output FWHM.
pub const OUTPUT_SPAN_WIDTHS: f64 = 6.0;

/// Predicted output FWHM on each side of the centre compared in
/// [`classical_product_check`].
const PRODUCT_CHECK_WIDTHS: f64 = 8.0;

/// Fewest output samples compared in [`classical_product_check`].
const PRODUCT_CHECK_MIN_POINTS: usize = 256;

fn trapezoid_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Unnormalized output amplitude on `out_grid`, without window checks.
pub fn upconvert_raw(photon: &SpectralAmplitude, laser: &SpectralAmplitude, out_grid: &FrequencyGrid) -> SpectralAmplitude {
    let pg = *photon.grid();
    let lg = *laser.grid();
    let pv: Vec<Complex64> = photon.values().iter().enumerate().map(|(k, v)| v * trapezoid_weight(k, pg.count)).collect();
    let lv = laser.values();
    // laser grid position of ν3 - ν_k is pos0 - k·ratio
    let ratio = pg.step / lg.step;
    let last = (lg.count - 1) as f64;
    // photon samples whose partner ν3 - ν lies on the laser grid
    let range = |nu3: f64| {
        let lo = ((nu3 - lg.end() - pg.start) / pg.step).floor().max(0.0) as usize;
        let hi = (((nu3 - lg.start - pg.start) / pg.step).ceil().max(-1.0) + 1.0).min(pg.count as f64) as usize;
        (lo, hi)
    };
    // Neighbouring outputs read neighbouring laser samples, so a block of
    // outputs shares one pass over the photon.
    let values: Vec<Complex64> = out_grid
        .to_vec()
        .par_chunks(CONVOLUTION_BLOCK)
        .flat_map_iter(|block| {
            let (lo, hi) = block.iter().fold((pg.count, 0), |(lo, hi), &nu3| {
                let (a, b) = range(nu3);
                (lo.min(a), hi.max(b))
            });
            // laser grid position of ν3 - ν_k is pos0 - k·ratio
            let pos0: Vec<f64> = block.iter().map(|&nu3| (nu3 - pg.start - lg.start) / lg.step).collect();
            let mut acc = vec![Complex64::new(0.0, 0.0); block.len()];
            for (k, &f) in pv.iter().enumerate().take(hi).skip(lo) {
                let shift = k as f64 * ratio;
                for (a, &p0) in acc.iter_mut().zip(&pos0) {
                    let pos = p0 - shift;
                    if !(pos >= 0.0) || pos > last {
                        continue;
                    }
                    let i = (pos as usize).min(lg.count - 2);
                    let t = pos - i as f64;
                    *a += f * (lv[i] + (lv[i + 1] - lv[i]) * t);
                }
            }
            acc.into_iter().map(|a| a * pg.step)
        })
        .collect();
    SpectralAmplitude::new(*out_grid, values).expect("one value per output sample")
}

/// Upconverted amplitude normalized to unit peak intensity.
///
/// Fails with [`Error::Window`] when the outer sixteenth of the output window
/// on either side holds more than [`WINDOW_CLIP_LIMIT`] of the energy.
pub fn upconvert(photon: &SpectralAmplitude, laser: &SpectralAmplitude, out_grid: &FrequencyGrid) -> Result<SpectralAmplitude> {
    let raw = upconvert_raw(photon, laser, out_grid);
    let clipped_fraction = raw.intensity().edge_energy_fraction();
    if !(clipped_fraction <= WINDOW_CLIP_LIMIT) {
        return Err(Error::Window { clipped_fraction, limit: WINDOW_CLIP_LIMIT });
    }
    Ok(raw.normalized())
}

/// Offset of the exact output intensity peak from `ν0P + ν0L` and the exact
/// output FWHM, from the Gaussian integral over complex widths. Used only to
/// place output windows.
fn gaussian_output(photon: &PulseSpec, laser: &PulseSpec) -> (f64, f64) {
    let p = Complex64::new(2.0 * LN_2 / (photon.fwhm * photon.fwhm), -photon.chirp);
    let q = Complex64::new(2.0 * LN_2 / (laser.fwhm * laser.fwhm), -laser.chirp);
    let d = photon.delay - laser.delay;
    let kappa = (p * q / (p + q)).re;
    let linear = (Complex64::new(0.0, 2.0 * PI * d) * q / (p + q)).re;
    (linear / (2.0 * kappa), (2.0 * LN_2 / kappa).sqrt())
}

/// Output grid of `points` samples spanning [`OUTPUT_SPAN_WIDTHS`] times the
/// predicted FWHM around the predicted (delay-shifted) centre.
pub fn default_output_grid(photon: &PulseSpec, laser: &PulseSpec, points: usize) -> Result<FrequencyGrid> {
    photon.validate()?;
    laser.validate()?;
    let (shift, fwhm) = gaussian_output(photon, laser);
    let predicted = bandwidth_general(photon.fwhm, laser.fwhm, photon.chirp, laser.chirp)?;
    debug_assert!(((fwhm - predicted) / predicted).abs() < 1e-6);
    FrequencyGrid::centered(photon.nu0 + laser.nu0 + shift, OUTPUT_SPAN_WIDTHS * predicted, points)
}

/// Numerical grid settings shared by the higher-level drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    /// Minimum samples per input grid; the phase rule may raise it.
    pub input_points: usize,
    pub output_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { input_points: DEFAULT_INPUT_POINTS, output_points: DEFAULT_OUTPUT_POINTS }
    }
}

/// Sample both pulses on their default grids and upconvert onto the default
/// output grid.
pub fn simulate(photon: &PulseSpec, laser: &PulseSpec, opts: GridOptions) -> Result<SpectralAmplitude> {
    let p = synthesize(photon, &FrequencyGrid::for_pulse(photon, opts.input_points)?)?;
    let l = synthesize(laser, &FrequencyGrid::for_pulse(laser, opts.input_points)?)?;
    upconvert(&p, &l, &default_output_grid(photon, laser, opts.output_points)?)
}

/// Measured features of an output spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFeatures {
    /// Hz
    pub center_freq: f64,
    /// m
    pub center_wl: f64,
    /// Hz
    pub fwhm: f64,
    /// Peak intensity before normalization.
    pub peak_intensity: f64,
}

/// Peak position, FWHM and height of a sampled intensity spectrum.
pub fn measure_spectrum(spectrum: &Spectrum) -> Result<SpectrumFeatures> {
    let x = spectrum.grid.to_vec();
    let peak = measure_peak(&x, &spectrum.values)?;
    Ok(SpectrumFeatures {
        center_freq: peak.position,
        center_wl: frequency_to_wavelength(peak.position)?,
        fwhm: measure_fwhm(&x, &spectrum.values)?,
        peak_intensity: peak.value,
    })
}

/// One row of a delay scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScanRow {
    /// Δτ = τ_laser - τ_photon, s.
    pub delay: f64,
    /// m
    pub center_wl: f64,
    /// Hz
    pub center_freq: f64,
    /// Hz
    pub fwhm: f64,
    /// Peak intensity relative to the peak at zero delay.
    pub peak_intensity: f64,
}

/// Upconvert once per delay. Rows keep the order of `delays`; a row whose
/// run fails carries the error and the scan continues.
///
/// The delay is applied to the photon (τ_P = τ_L - Δτ) so that the sampled
/// laser field is shared by every row.
pub fn delay_scan(
    photon: &PulseSpec,
    laser: &PulseSpec,
    delays: &[f64],
    opts: GridOptions,
) -> Result<Vec<std::result::Result<DelayScanRow, Error>>> {
    if delays.is_empty() {
        return Ok(Vec::new());
    }
    let laser_amp = synthesize(laser, &FrequencyGrid::for_pulse(laser, opts.input_points)?)?;
    let photon_grid = FrequencyGrid::for_pulse(photon, opts.input_points)?;

    let run = |delay: f64| -> Result<SpectrumFeatures> {
        let shifted = photon.with_delay(laser.delay - delay);
        let photon_amp = synthesize(&shifted, &photon_grid)?;
        let out = default_output_grid(&shifted, laser, opts.output_points)?;
        let raw = upconvert_raw(&photon_amp, &laser_amp, &out);
        let spectrum = raw.intensity();
        let clipped_fraction = spectrum.edge_energy_fraction();
        if !(clipped_fraction <= WINDOW_CLIP_LIMIT) {
            return Err(Error::Window { clipped_fraction, limit: WINDOW_CLIP_LIMIT });
        }
        measure_spectrum(&spectrum)
    };

    let reference = run(0.0)?.peak_intensity;
    let rows = delays
        .par_iter()
        .map(|&delay| {
            run(delay).map(|f| DelayScanRow {
                delay,
                center_wl: f.center_wl,
                center_freq: f.center_freq,
                fwhm: f.fwhm,
                peak_intensity: f.peak_intensity / reference,
            })
        })
        .collect();
    Ok(rows)
}

/// Analytic time-domain envelope of a Gaussian pulse relative to `nu_ref`,
/// in the convention `e(t) = ∫ E(ν) exp(-2πi (ν - ν_ref) t) dν`.
fn analytic_envelope(spec: &PulseSpec, nu_ref: f64, t: f64) -> Complex64 {
    let p = Complex64::new(2.0 * LN_2 / (spec.fwhm * spec.fwhm), -spec.chirp);
    let u = spec.delay - t;
    let carrier = Complex64::from_polar(1.0, -2.0 * PI * (spec.nu0 - nu_ref) * t);
    (PI / p).sqrt() * (-(PI * PI) * u * u / p).exp() * carrier
}

/// `out[m] = Σ_j v[j] exp(sign · 2πi (m - N/2)(j - N/2) / N)` for even N.
fn centered_dft(values: &mut [Complex64], inverse: bool) {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    for (j, v) in values.iter_mut().enumerate() {
        if j % 2 == 1 {
            *v = -*v;
        }
    }
    fft.process(values);
    // exp(sign · iπ N/2) = (-1)^(N/2)
    let global = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    for (m, v) in values.iter_mut().enumerate() {
        *v *= if m % 2 == 1 { -global } else { global };
    }
}

/// Largest common step and a power-of-two count with which both pulses pass
/// the grid rules when each is carried on its own anchored grid.
pub fn common_sampling(photon: &PulseSpec, laser: &PulseSpec) -> Result<(f64, usize)> {
    let gp = FrequencyGrid::for_pulse(photon, 16)?;
    let gl = FrequencyGrid::for_pulse(laser, 16)?;
    let step = gp.step.min(gl.step);
    let half = SPAN_HALF_WIDTHS * photon.fwhm.max(laser.fwhm);
    let count = (2.0 * (half / step).ceil() + 2.0) as usize;
    Ok((step, count.next_power_of_two()))
}

/// Compute the output two ways and return the largest difference between
/// the unit-peak output intensities:
///
/// * frequency domain: direct convolution of the sampled spectra;
/// * time domain: product of the two analytic temporal envelopes sampled on
///   the time grid dual to the frequency grid, transformed back by FFT.
///
/// Both routes share the anchored grid with the given `step` and `count` (a
/// power of two); the comparison covers ±8 predicted output FWHM around the
/// predicted centre. The grids are deliberately not checked: when
/// the step under-resolves the chirp the temporal window `1/step` is shorter
/// than the stretched pulses and the two routes disagree.
pub fn classical_product_check(photon: &PulseSpec, laser: &PulseSpec, step: f64, count: usize) -> Result<f64> {
    photon.validate()?;
    laser.validate()?;
    if !count.is_power_of_two() {
        return Err(Error::validation(format!("sample count must be a power of two, got {count}")));
    }
    // Direct route: each pulse over its own ±SPAN_HALF_WIDTHS FWHM, on samples
    // of the anchored count-point grid.
    let own_grid = |spec: &PulseSpec| {
        let half = ((SPAN_HALF_WIDTHS * spec.fwhm / step).ceil() as usize).min(count / 2 - 1);
        FrequencyGrid::anchored(spec.nu0, step, 2 * half + 1)
    };
    let sample = |spec: &PulseSpec, g: &FrequencyGrid| {
        SpectralAmplitude::new(*g, g.frequencies().map(|nu| spec.amplitude(nu)).collect())
    };
    let pa = sample(photon, &own_grid(photon)?)?;
    let la = sample(laser, &own_grid(laser)?)?;

    // Output sample m sits at ν_ref3 + (m - N/2) step with ν_ref3 = ν0P + ν0L;
    // the compared window follows the predicted centre and width.
    let nu_ref = photon.nu0 + laser.nu0;
    let (shift, fwhm) = gaussian_output(photon, laser);
    let wanted = (2.0 * PRODUCT_CHECK_WIDTHS * fwhm / step).ceil().min(count as f64) as usize;
    let shown = wanted.max(PRODUCT_CHECK_MIN_POINTS).min(count);
    let middle = (count / 2) as f64 + (shift / step).round();
    let first = (middle - (shown / 2) as f64).clamp(0.0, (count - shown) as f64) as usize;
    let out = FrequencyGrid::new(nu_ref + (first as f64 - (count / 2) as f64) * step, step, shown)?;
    let direct = upconvert_raw(&pa, &la, &out).intensity();

    let dt = 1.0 / (count as f64 * step);
    let mut field: Vec<Complex64> = (0..count)
        .map(|j| {
            let t = (j as f64 - (count / 2) as f64) * dt;
            analytic_envelope(photon, photon.nu0, t) * analytic_envelope(laser, laser.nu0, t)
        })
        .collect();
    centered_dft(&mut field, true);
    let product: Vec<f64> = field[first..first + shown].iter().map(|v| (v * dt).norm_sqr()).collect();

    let max_direct = direct.peak_value();
    let max_product = product.iter().copied().fold(0.0, f64::max);
    if !(max_direct > 0.0) || !(max_product > 0.0) {
        return Err(Error::Measurement("no output intensity inside the compared window".into()));
    }
    Ok(direct
        .values
        .iter()
        .zip(&product)
        .map(|(a, b)| (a / max_direct - b / max_product).abs())
        .fold(0.0, f64::max))
}
