//! Energy-time entangled photon pairs with the degenerate Gaussian joint
//! spectral amplitude
//!
//! ```text
//! f(ν_s, ν_i) ∝ exp(-(ν_s-ν0)²/2σ²) exp(-(ν_i-ν0)²/2σ²) exp(-(ν_s+ν_i-2ν0)²/2σ_c²)
//! ```
//!
//! where σ_c sets the correlation: σ_c → ∞ is separable, σ_c → 0 perfectly
//! anticorrelated. The signal photon carries chirp A and meets a laser pulse
//! in the SFG crystal; the idler is traced out.
//!
//! Closed forms are evaluated in units of σ so that extreme ratios
//! σ_c/σ ∈ [1e-6, 1e6] stay far from overflow.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{phase_resolution_limit, FrequencyGrid, PulseSpec, Spectrum};
use crate::quantities::FWHM_PER_RMS;
use crate::sfg_analytic::{bandwidth_general, frequency_shift};
use crate::sfg_numeric::{OUTPUT_SPAN_WIDTHS, WINDOW_CLIP_LIMIT};

/// Default samples per axis of the traced-spectrum quadrature.
pub const DEFAULT_TRACED_POINTS: usize = 512;

/// Half-width of the quadrature windows, in intensity-RMS units.
const WINDOW_WIDTHS: f64 = 6.0;

/// Degenerate two-photon Gaussian joint spectral amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsaSpec {
    /// Common centre frequency of signal and idler, Hz.
    pub nu0: f64,
    /// Single-photon amplitude scale σ, Hz.
    pub sigma: f64,
    /// Correlation scale σ_c, Hz.
    pub sigma_c: f64,
}

impl JsaSpec {
    pub fn new(nu0: f64, sigma: f64, sigma_c: f64) -> Result<Self> {
        let jsa = JsaSpec { nu0, sigma, sigma_c };
        jsa.validate()?;
        Ok(jsa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu0 > 0.0) || !self.nu0.is_finite() {
            return Err(Error::validation(format!("centre frequency must be positive, got {}", self.nu0)));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() || !(self.sigma_c > 0.0) || !self.sigma_c.is_finite() {
            return Err(Error::validation("sigma and sigma_c must be positive and finite"));
        }
        Ok(())
    }

    /// Unnormalized amplitude at signal and idler frequencies.
    pub fn amplitude(&self, nu_s: f64, nu_i: f64) -> f64 {
        let x = nu_s - self.nu0;
        let y = nu_i - self.nu0;
        let s2 = self.sigma * self.sigma;
        (-(x * x + y * y) / (2.0 * s2) - (x + y).powi(2) / (2.0 * self.sigma_c * self.sigma_c)).exp()
    }

    /// Intensity FWHM of either photon's marginal spectrum.
    pub fn marginal_bandwidth(&self) -> f64 {
        marginal_bandwidth(self.sigma, self.sigma_c)
    }
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!("{name} must be positive and finite, got {v:e}")));
        }
    }
    Ok(())
}

/// Intensity-RMS scale s of the single-photon marginal, `exp(-(ν-ν0)²/s²)`.
fn marginal_scale(sigma: f64, sigma_c: f64) -> f64 {
    let c2 = (sigma_c / sigma).powi(2);
    sigma * ((c2 + 1.0) / (c2 + 2.0)).sqrt()
}

/// `2√ln2 · sqrt(σ²(σc²+σ²)/(σc²+2σ²))`.
pub fn marginal_bandwidth(sigma: f64, sigma_c: f64) -> f64 {
    FWHM_PER_RMS * marginal_scale(sigma, sigma_c)
}

/// Output FWHM for an entangled signal photon upconverted with a laser of
/// amplitude scale σ_L (FWHM 2√ln2 σ_L) under balanced chirps ±A, in the
/// large-chirp regime A²σ⁴ ≫ 1:
///
/// ```text
/// Δν = 2√ln2 sqrt( [σ²σL² + σc²(σ²+σL²)] [σ⁴ + 2σ²σL² + σc²(σ²+σL²)]
///                / (2σ²σL² {σ² + 2A²σc² [σ⁴ + 2σ²σL² + σc²(σ²+σL²)]}) )
/// ```
pub fn entangled_sfg_bandwidth(sigma: f64, sigma_c: f64, sigma_l: f64, chirp: f64) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c), ("sigma_L", sigma_l)])?;
    if !chirp.is_finite() {
        return Err(Error::domain("chirp must be finite"));
    }
    let c2 = (sigma_c / sigma).powi(2);
    let l2 = (sigma_l / sigma).powi(2);
    let a = chirp * sigma * sigma;
    let first = l2 + c2 * (1.0 + l2);
    let second = 1.0 + 2.0 * l2 + c2 * (1.0 + l2);
    let den = 2.0 * l2 * (1.0 + 2.0 * a * a * c2 * second);
    Ok(FWHM_PER_RMS * sigma * (first * second / den).sqrt())
}

/// `A² σ⁴`; the entangled bandwidth formula assumes this is ≫ 1.
pub fn entangled_chirp_metric(sigma: f64, chirp: f64) -> f64 {
    (chirp * sigma * sigma).powi(2)
}

/// Amplitude RMS width of the signal after heralding on the idler frequency,
/// `σ_eff = sqrt(σ² σc² / (σ² + σc²))`.
pub fn heralded_effective_sigma(sigma: f64, sigma_c: f64) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c)])?;
    let c2 = (sigma_c / sigma).powi(2);
    Ok(sigma * (c2 / (1.0 + c2)).sqrt())
}

/// Pure signal state left by detecting the idler at `idler_frequency`, as a
/// chirped Gaussian pulse. Its centre moves by `-(ν_i - ν0) σ²/(σ²+σc²)`.
pub fn heralded_photon(jsa: &JsaSpec, idler_frequency: f64, chirp: f64) -> Result<PulseSpec> {
    jsa.validate()?;
    let sigma_eff = heralded_effective_sigma(jsa.sigma, jsa.sigma_c)?;
    let r = 1.0 / (1.0 + (jsa.sigma_c / jsa.sigma).powi(2));
    let nu0 = jsa.nu0 - (idler_frequency - jsa.nu0) * r;
    PulseSpec::new(nu0, FWHM_PER_RMS * sigma_eff, chirp, 0.0)
}

/// Purity `Tr ρ_S²` of the signal's reduced state, `σc sqrt(2σ²+σc²)/(σ²+σc²)`.
pub fn purity_initial(sigma: f64, sigma_c: f64) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c)])?;
    let c = sigma_c / sigma;
    Ok(c * (2.0 + c * c).sqrt() / (1.0 + c * c))
}

/// Purities before and after upconversion with Rényi-2 entropies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    /// Tr ρ_S² of the signal photon.
    pub purity_initial: f64,
    /// Tr ρ_SFG² of the upconverted photon.
    pub purity_final: f64,
    /// purity_final - purity_initial, never negative.
    pub purity_difference: f64,
    /// purity_final² - purity_initial².
    pub squared_purity_gain: f64,
    /// -ln purity_initial, nats.
    pub renyi2_initial: f64,
    /// -ln purity_final, nats.
    pub renyi2_final: f64,
}

/// Rényi-2 entropy `-ln Tr ρ²` in nats.
pub fn renyi2(purity: f64) -> f64 {
    -purity.ln()
}

/// Purity of the upconverted photon for balanced chirps A_P = -A_L = A:
///
/// ```text
/// Tr ρ² = [σ⁴σc²(2σ²+σc²) + σ²(σ²+σc²)(2σ²+σc²+4A²σ⁴σc²)σL² + 4A²σ⁴σc²(2σ²+σc²)σL⁴]
///       / sqrt(σ⁴(σ²+σc²) B C)
/// B = σ²σc²(2σ²+σc²) + (σ²+σc²)(2σ²+σc²+4A²σ⁴σc²)σL² + 4A²σ²σc²(2σ²+σc²)σL⁴
/// C = σc²σL² + σ⁴[1 + 4A²σL²(σc²+σL²)] + σ²[2σL² + σc²(1 + 4A²σL⁴)]
/// ```
///
/// The difference of squared purities is
/// `σ⁴(2σ²+σc²+4A²σ⁴σc²)σL² / ((σ²+σc²)² C) ≥ 0`, from which the purity
/// difference follows without cancellation.
pub fn purity_final(sigma: f64, sigma_c: f64, sigma_l: f64, chirp: f64) -> Result<PurityReport> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c), ("sigma_L", sigma_l)])?;
    if !chirp.is_finite() {
        return Err(Error::domain("chirp must be finite"));
    }
    // σ = 1 units
    let c2 = (sigma_c / sigma).powi(2);
    let l2 = (sigma_l / sigma).powi(2);
    let a2 = (chirp * sigma * sigma).powi(2);
    let k = 2.0 + c2;
    let m = 2.0 + c2 + 4.0 * a2 * c2;

    let b = c2 * k + (1.0 + c2) * m * l2 + 4.0 * a2 * c2 * k * l2 * l2;
    let c = c2 * l2 + (1.0 + 4.0 * a2 * l2 * (c2 + l2)) + (2.0 * l2 + c2 * (1.0 + 4.0 * a2 * l2 * l2));
    // The numerator equals σ²B, so the ratio collapses to sqrt(B / ((σ²+σc²) C)).
    let purity_final = (b / ((1.0 + c2) * c)).sqrt();

    let initial = purity_initial(sigma, sigma_c)?;
    let gain = m * l2 / ((1.0 + c2).powi(2) * c);
    Ok(PurityReport {
        purity_initial: initial,
        purity_final,
        purity_difference: gain / (purity_final + initial),
        squared_purity_gain: gain,
        renyi2_initial: renyi2(initial),
        renyi2_final: renyi2(purity_final),
    })
}

/// Quadrature settings for [`traced_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracedPoints {
    /// Samples over the idler frequency.
    pub idler: usize,
    /// Samples over the signal frequency for each idler sample.
    pub signal: usize,
}

impl Default for TracedPoints {
    fn default() -> Self {
        TracedPoints { idler: DEFAULT_TRACED_POINTS, signal: DEFAULT_TRACED_POINTS }
    }
}

/// `exp(c2 k² + c1 k + c0)` for k in 0..n, built by recurrence outward from
/// the largest term so that underflow only affects negligible samples.
fn gaussian_sequence(c2: Complex64, c1: Complex64, c0: Complex64, peak: f64, out: &mut [Complex64]) {
    let n = out.len();
    let start = peak.round().clamp(0.0, (n - 1) as f64) as usize;
    let kf = start as f64;
    let step2 = (2.0 * c2).exp();
    out[start] = (c2 * kf * kf + c1 * kf + c0).exp();
    let mut ratio = (c2 * (2.0 * kf + 1.0) + c1).exp();
    for k in start + 1..n {
        out[k] = out[k - 1] * ratio;
        ratio *= step2;
    }
    let mut ratio = (c2 * (1.0 - 2.0 * kf) - c1).exp();
    for k in (0..start).rev() {
        out[k] = out[k + 1] * ratio;
        ratio *= step2;
    }
}

fn trapezoid(k: usize, n: usize) -> f64 {
    if k == 0 || k + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// Upconverted intensity with the idler traced out,
///
/// ```text
/// S(ν) = ∫ dν_i | ∫ dν_s f(ν_s, ν_i) e^{iA(ν_s-ν0)²} α(ν - ν_s) |²
/// ```
///
/// by nested trapezoidal quadrature, normalized to unit peak. The idler runs
/// over ±6 marginal widths; for each idler sample the signal window follows
/// the conditional centre `-(ν_i-ν0) σ²/(σ²+σc²)` with ±6 conditional widths,
/// so strongly correlated states are resolved without a huge grid.
pub fn traced_spectrum(
    jsa: &JsaSpec,
    laser: &PulseSpec,
    signal_chirp: f64,
    out_grid: &FrequencyGrid,
    points: TracedPoints,
) -> Result<Spectrum> {
    jsa.validate()?;
    laser.validate()?;
    if points.idler < 16 || points.signal < 16 {
        return Err(Error::validation("traced quadrature needs at least 16 samples per axis"));
    }
    let (ny, nx) = (points.idler, points.signal);
    let s2 = jsa.sigma * jsa.sigma;
    let sc2 = jsa.sigma_c * jsa.sigma_c;
    // conditional intensity exp(-κ (x - x0)²), κ = 1/σ² + 1/σc²
    let kappa = 1.0 / s2 + 1.0 / sc2;
    let shrink = s2 / (s2 + sc2);
    let y_half = WINDOW_WIDTHS * marginal_scale(jsa.sigma, jsa.sigma_c);
    let x_half = WINDOW_WIDTHS / kappa.sqrt();
    let hy = 2.0 * y_half / (ny - 1) as f64;
    let hx = 2.0 * x_half / (nx - 1) as f64;

    // Largest phase change per signal sample over the windows.
    let d_lo = out_grid.start - jsa.nu0 - laser.nu0;
    let d_hi = out_grid.end() - jsa.nu0 - laser.nu0;
    let x_extent = shrink * y_half + x_half;
    let mut slope: f64 = 0.0;
    for x in [-x_extent, x_extent] {
        for d in [d_lo, d_hi] {
            let s = 2.0 * signal_chirp * x - 2.0 * laser.chirp * (d - x) - 2.0 * PI * laser.delay;
            slope = slope.max(s.abs());
        }
    }
    if slope * hx > PI / 4.0 {
        return Err(Error::GridPrecondition(format!(
            "signal step {hx:.3e} Hz under-resolves the integrand phase ({:.2} rad per sample); raise the signal sample count",
            slope * hx
        )));
    }

    // Photon factor f(x, y) e^{iAx²} times weights, one row per idler sample.
    let photon: Vec<Vec<Complex64>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = -y_half + j as f64 * hy;
            let x0 = -shrink * y;
            let wy = trapezoid(j, ny);
            (0..nx)
                .map(|k| {
                    let x = x0 - x_half + k as f64 * hx;
                    let env = -(x * x + y * y) / (2.0 * s2) - (x + y).powi(2) / (2.0 * sc2);
                    Complex64::from_polar(env.exp() * wy.sqrt() * trapezoid(k, nx), signal_chirp * x * x)
                })
                .collect()
        })
        .collect();

    let a_l = 2.0 * LN_2 / (laser.fwhm * laser.fwhm);
    let q = Complex64::new(-a_l, laser.chirp);
    let i2pt = Complex64::new(0.0, 2.0 * PI * laser.delay);
    let values: Vec<f64> = out_grid
        .to_vec()
        .par_iter()
        .map(|&nu| {
            let mut lvals = vec![Complex64::new(0.0, 0.0); nx];
            let mut total = 0.0;
            for (j, row) in photon.iter().enumerate() {
                let y = -y_half + j as f64 * hy;
                // laser offset D_k = D0 - k hx
                let d0 = nu - jsa.nu0 - laser.nu0 - (-shrink * y - x_half);
                let c2 = q * hx * hx;
                let c1 = -2.0 * q * d0 * hx - i2pt * hx;
                let c0 = q * d0 * d0 + i2pt * d0;
                gaussian_sequence(c2, c1, c0, d0 / hx, &mut lvals);
                let inner: Complex64 = row.iter().zip(&lvals).map(|(p, l)| p * l).sum();
                total += inner.norm_sqr();
            }
            total * hx * hx * hy
        })
        .collect();

    let spectrum = Spectrum { grid: *out_grid, values };
    let clipped_fraction = spectrum.edge_energy_fraction();
    if !(clipped_fraction <= WINDOW_CLIP_LIMIT) {
        return Err(Error::Window { clipped_fraction, limit: WINDOW_CLIP_LIMIT });
    }
    Ok(spectrum.normalized())
}

/// Rough output FWHM used to size windows: the entangled formula for
/// balanced chirps, otherwise the pure-state result for the marginal.
fn traced_width_estimate(jsa: &JsaSpec, laser: &PulseSpec, signal_chirp: f64) -> Result<f64> {
    let sigma_l = laser.fwhm / FWHM_PER_RMS;
    let balanced = signal_chirp != 0.0 && (signal_chirp + laser.chirp).abs() <= 1e-9 * signal_chirp.abs();
    if balanced {
        entangled_sfg_bandwidth(jsa.sigma, jsa.sigma_c, sigma_l, signal_chirp)
    } else {
        bandwidth_general(jsa.marginal_bandwidth(), laser.fwhm, signal_chirp, laser.chirp)
    }
}

/// [`traced_spectrum`] on an output window sized from the closed forms and
/// widened (up to 16×) while it clips.
pub fn traced_spectrum_auto(
    jsa: &JsaSpec,
    laser: &PulseSpec,
    signal_chirp: f64,
    output_points: usize,
    points: TracedPoints,
) -> Result<Spectrum> {
    let width = traced_width_estimate(jsa, laser, signal_chirp)?;
    let center = jsa.nu0 + laser.nu0 + if signal_chirp == 0.0 { 0.0 } else { frequency_shift(signal_chirp, laser.delay)? };
    let mut span = OUTPUT_SPAN_WIDTHS * width;
    let mut last = None;
    for _ in 0..5 {
        let grid = FrequencyGrid::centered(center, span, output_points)?;
        match traced_spectrum(jsa, laser, signal_chirp, &grid, points) {
            Err(e @ Error::Window { .. }) => last = Some(e),
            other => return other,
        }
        span *= 2.0;
    }
    Err(last.expect("at least one attempt"))
}

/// FWHM of the traced spectrum at the requested resolution and the relative
/// change when both quadrature axes are doubled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergedWidth {
    pub fwhm: f64,
    pub relative_change: f64,
}

pub fn traced_fwhm_converged(
    jsa: &JsaSpec,
    laser: &PulseSpec,
    signal_chirp: f64,
    output_points: usize,
    points: TracedPoints,
) -> Result<ConvergedWidth> {
    let coarse = traced_spectrum_auto(jsa, laser, signal_chirp, output_points, points)?.fwhm()?;
    let doubled = TracedPoints { idler: 2 * points.idler, signal: 2 * points.signal };
    let fine = traced_spectrum_auto(jsa, laser, signal_chirp, output_points, doubled)?.fwhm()?;
    Ok(ConvergedWidth { fwhm: fine, relative_change: ((fine - coarse) / fine).abs() })
}

/// `Tr ρ²` of a bipartite amplitude sampled as `g[row][col]`, tracing over
/// columns: `Σ_{r,r'} |Σ_c g[r][c] g*[r'][c]|² / (Σ |g|²)²`.
fn reduced_purity(g: &[Vec<Complex64>]) -> f64 {
    let n = g.len();
    let norm: f64 = g.iter().flatten().map(|v| v.norm_sqr()).sum();
    let mut sum = 0.0;
    for r in 0..n {
        for rp in 0..n {
            let overlap: Complex64 = g[r].iter().zip(&g[rp]).map(|(a, b)| a * b.conj()).sum();
            sum += overlap.norm_sqr();
        }
    }
    sum / (norm * norm)
}

/// Brute-force `Tr ρ_S²` of the signal from the sampled joint amplitude on
/// an `n × n` grid.
pub fn purity_initial_by_quadrature(sigma: f64, sigma_c: f64, n: usize) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c)])?;
    let jsa = JsaSpec { nu0: 1.0, sigma, sigma_c };
    let half = WINDOW_WIDTHS * sigma;
    let h = 2.0 * half / (n - 1) as f64;
    let g: Vec<Vec<Complex64>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| Complex64::new(jsa.amplitude(1.0 - half + r as f64 * h, 1.0 - half + c as f64 * h), 0.0))
                .collect()
        })
        .collect();
    Ok(reduced_purity(&g))
}

/// Fewest points per axis for which [`purity_final_by_quadrature`] keeps the
/// chirp phase resolved across its window (the grid phase rule).
pub fn quadrature_points_needed(sigma: f64, sigma_l: f64, chirp: f64) -> usize {
    let half = WINDOW_WIDTHS * sigma.max(sigma_l);
    let limit = phase_resolution_limit(chirp, half);
    if limit.is_infinite() {
        return 16;
    }
    ((2.0 * half / limit).floor() as usize + 2).max(16)
}

/// Brute-force `Tr ρ_SFG²` for balanced chirps ±A: the effective amplitude
/// `G(ν, ν_i) = ∫ dν_s f(ν_s, ν_i) e^{iAν_s²} α(ν - ν_s)` is sampled on an
/// `n × n` grid by trapezoidal quadrature over ν_s (with `n` samples), and
/// the idler is traced out.
pub fn purity_final_by_quadrature(sigma: f64, sigma_c: f64, sigma_l: f64, chirp: f64, n: usize) -> Result<f64> {
    check_positive(&[("sigma", sigma), ("sigma_c", sigma_c), ("sigma_L", sigma_l)])?;
    let jsa = JsaSpec { nu0: 1.0, sigma, sigma_c };
    let half = WINDOW_WIDTHS * sigma.max(sigma_l);
    let h = 2.0 * half / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|k| -half + k as f64 * h).collect();
    let laser = |nu: f64| Complex64::from_polar((-nu * nu / (2.0 * sigma_l * sigma_l)).exp(), -chirp * nu * nu);
    let sfg_half = 2.0 * half;
    let hz = 2.0 * sfg_half / (n - 1) as f64;
    let g: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let z = -sfg_half + r as f64 * hz;
            xs.iter()
                .map(|&y| {
                    xs.iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            let f = jsa.amplitude(1.0 + x, 1.0 + y);
                            Complex64::from_polar(f * trapezoid(k, n), chirp * x * x) * laser(z - x)
                        })
                        .sum::<Complex64>()
                })
                .collect()
        })
        .collect();
    Ok(reduced_purity(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::units::*;
    use crate::sfg_analytic::{bandwidth_compressed, bandwidth_unchirped};

    const A: f64 = 25.8e6 * FS2;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn reference_sigmas() -> (f64, f64) {
        (1740.0 * GHZ / FWHM_PER_RMS, 4770.0 * GHZ / FWHM_PER_RMS)
    }

    #[test]
    fn marginal_limits() {
        let s = 1.0 * THZ;
        assert!(rel(marginal_bandwidth(s, 1e6 * s), FWHM_PER_RMS * s) < 1e-9);
        assert!(rel(marginal_bandwidth(s, 1e-6 * s), FWHM_PER_RMS * s / 2f64.sqrt()) < 1e-9);
        assert!(rel(marginal_bandwidth(s, s), FWHM_PER_RMS * s * (2.0f64 / 3.0).sqrt()) < 1e-12);
    }

    #[test]
    fn marginal_matches_sampled_jsa() {
        let jsa = JsaSpec::new(370.0 * THZ, 1.0 * THZ, 0.7 * THZ).unwrap();
        let n = 801;
        let h = 12.0 * THZ / (n - 1) as f64;
        let nus: Vec<f64> = (0..n).map(|k| jsa.nu0 - 6.0 * THZ + k as f64 * h).collect();
        let marginal: Vec<f64> = nus.iter().map(|&s| nus.iter().map(|&i| jsa.amplitude(s, i).powi(2)).sum()).collect();
        let w = crate::pulses::measure_fwhm(&nus, &marginal).unwrap();
        assert!(rel(w, jsa.marginal_bandwidth()) < 1e-4);
    }

    #[test]
    fn entangled_bandwidth_limits() {
        let (s, sl) = reference_sigmas();
        let separable = entangled_sfg_bandwidth(s, 1e3 * s, sl, A).unwrap();
        let eq2 = bandwidth_compressed(FWHM_PER_RMS * s, FWHM_PER_RMS * sl, A).unwrap();
        assert!(rel(separable, eq2) < 1e-3, "{separable:e} vs {eq2:e}");

        let limit = bandwidth_unchirped(marginal_bandwidth(s, 1e-3 * s), FWHM_PER_RMS * sl);
        let weak = A / 100.0;
        let correlated = entangled_sfg_bandwidth(s, 1e-3 * s, sl, weak).unwrap();
        assert!(rel(correlated, limit) < 1e-3, "{correlated:e} vs {limit:e}");
        let other = entangled_sfg_bandwidth(s, 1e-3 * s, sl, weak * 10.0).unwrap();
        assert!(rel(other, correlated) < 1e-3);
    }

    #[test]
    fn entangled_bandwidth_is_monotone_in_correlation() {
        let (s, sl) = reference_sigmas();
        let mut last = f64::INFINITY;
        for k in 0..=600 {
            let ratio = 10f64.powf(-3.0 + k as f64 / 100.0);
            let w = entangled_sfg_bandwidth(s, ratio * s, sl, A).unwrap();
            assert!(w.is_finite() && w <= last);
            last = w;
        }
    }

    #[test]
    fn heralding() {
        let s = 1.0 * THZ;
        assert!(rel(heralded_effective_sigma(s, 1e6 * s).unwrap(), s) < 1e-9);
        assert!(heralded_effective_sigma(s, 1e-6 * s).unwrap() < 1e-5 * s);
        assert!(rel(heralded_effective_sigma(s, s).unwrap(), s / 2f64.sqrt()) < 1e-12);

        // narrow heralded photon: output width set by the laser
        let dl = 4770.0 * GHZ;
        let dp = FWHM_PER_RMS * heralded_effective_sigma(s, 1e-6 * s).unwrap();
        assert!(rel(bandwidth_general(dp, dl, A, -A).unwrap(), dl) < 1e-6);

        let jsa = JsaSpec::new(370.0 * THZ, s, s).unwrap();
        let p = heralded_photon(&jsa, 370.2 * THZ, A).unwrap();
        assert!((p.nu0 - (370.0 * THZ - 0.1 * THZ)).abs() < 1.0);
        assert!(rel(p.fwhm, FWHM_PER_RMS * s / 2f64.sqrt()) < 1e-12);
    }

    #[test]
    fn initial_purity() {
        let s = 1.0 * THZ;
        assert!((purity_initial(s, 1e6 * s).unwrap() - 1.0).abs() < 1e-9);
        assert!(purity_initial(s, 1e-6 * s).unwrap() < 1e-5);
        assert!((purity_initial(s, s).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-12);
        for &(sg, sc) in &[(1.0f64, 1.0f64), (2.0, 0.3), (0.5, 7.0)] {
            let printed = (sc * sc * (sg * sg + sc * sc).powi(2) * (2.0 * sg * sg + sc * sc)).sqrt()
                / (sg * sg + sc * sc).powi(2);
            assert!((purity_initial(sg, sc).unwrap() - printed).abs() < 1e-14);
        }
        let q = purity_initial_by_quadrature(1.0, 1.0, 96).unwrap();
        assert!((q - 3f64.sqrt() / 2.0).abs() < 1e-6, "{q}");
    }

    /// Compact form of the final purity with α = 1/σ², γ = 1/σc², λ = 1/σL².
    fn purity_final_compact(sigma: f64, sigma_c: f64, sigma_l: f64, chirp: f64) -> f64 {
        let (al, g, l) = (sigma.powi(-2), sigma_c.powi(-2), sigma_l.powi(-2));
        let p = (al * al + 2.0 * al * g + l * (al + g)) * (l * (al + g) + 4.0 * chirp * chirp);
        ((p - g * g * l * l) / (p + 4.0 * chirp * chirp * g * g)).sqrt()
    }

    #[test]
    fn final_purity_transcription() {
        for &(s, sc, sl, a) in &[(1.0, 1.0, 1.0, 0.0), (1.0, 0.2, 2.0, 1.5), (0.7, 3.0, 1.3, 0.4), (2.0, 0.05, 0.9, 7.0)] {
            let r = purity_final(s, sc, sl, a).unwrap();
            let compact = purity_final_compact(s, sc, sl, a);
            assert!((r.purity_final - compact).abs() < 1e-13, "{} vs {compact}", r.purity_final);
            assert!((r.purity_difference - (r.purity_final - r.purity_initial)).abs() < 1e-12);
            assert!((r.squared_purity_gain - (r.purity_final.powi(2) - r.purity_initial.powi(2))).abs() < 1e-12);
            assert!((r.renyi2_final + r.purity_final.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn separable_state_stays_pure() {
        let (s, sl) = reference_sigmas();
        for a in [0.0, A, 10.0 * A] {
            let r = purity_final(s, 1e3 * s, sl, a).unwrap();
            assert!((r.purity_final - 1.0).abs() < 1e-4, "{}", r.purity_final);
        }
        let r = purity_final(s, 1e6 * s, sl, A).unwrap();
        assert!((r.purity_initial - 1.0).abs() < 1e-4 && (r.purity_final - 1.0).abs() < 1e-4);
    }

    #[test]
    fn final_purity_matches_quadrature() {
        let expected = purity_final(1.0, 1.0, 1.0, 0.0).unwrap().purity_final;
        let q = purity_final_by_quadrature(1.0, 1.0, 1.0, 0.0, 96).unwrap();
        assert!((q - expected).abs() < 1e-4, "{q} vs {expected}");
        // chirped, unequal widths
        let expected = purity_final(1.0, 0.6, 1.4, 0.3).unwrap().purity_final;
        let q = purity_final_by_quadrature(1.0, 0.6, 1.4, 0.3, 128).unwrap();
        assert!((q - expected).abs() < 1e-4, "{q} vs {expected}");
    }

    #[test]
    fn quadrature_point_rule() {
        assert_eq!(quadrature_points_needed(1.0, 1.0, 0.0), 16);
        assert!(quadrature_points_needed(1.0, 1.4, 0.3) <= 128);
        let (s, sl) = reference_sigmas();
        assert!(quadrature_points_needed(s, sl, A) > 10_000);
    }

    fn traced_fwhm(sigma_c_ratio: f64, chirp: f64, points: usize) -> f64 {
        let (s, _) = reference_sigmas();
        let jsa = JsaSpec::new(369.6 * THZ, s, sigma_c_ratio * s).unwrap();
        let laser = PulseSpec::new(380.63 * THZ, 4770.0 * GHZ, -chirp, 0.0).unwrap();
        let pts = TracedPoints { idler: points, signal: points };
        traced_spectrum_auto(&jsa, &laser, chirp, 401, pts).unwrap().fwhm().unwrap()
    }

    #[test]
    fn traced_separable_reduces_to_pure_case() {
        let w = traced_fwhm(1e3, A, 256);
        let expected = bandwidth_compressed(1740.0 * GHZ, 4770.0 * GHZ, A).unwrap();
        assert!(rel(w, expected) < 0.01, "{w:e} vs {expected:e}");
    }

    #[test]
    fn traced_intermediate_matches_formula() {
        let (s, sl) = reference_sigmas();
        let w = traced_fwhm(1.0, A, 256);
        let expected = entangled_sfg_bandwidth(s, s, sl, A).unwrap();
        assert!(rel(w, expected) < 0.01, "{w:e} vs {expected:e}");
    }

    #[test]
    fn traced_correlated_ignores_chirp() {
        let (s, _) = reference_sigmas();
        let limit = bandwidth_unchirped(marginal_bandwidth(s, 1e-3 * s), 4770.0 * GHZ);
        let w1 = traced_fwhm(1e-3, A / 10.0, 256);
        let w2 = traced_fwhm(1e-3, A / 100.0, 256);
        assert!(rel(w1, limit) < 0.01, "{w1:e} vs {limit:e}");
        assert!(rel(w2, w1) < 0.01);
    }

    #[test]
    fn traced_narrow_window_is_rejected() {
        let (s, _) = reference_sigmas();
        let jsa = JsaSpec::new(369.6 * THZ, s, s).unwrap();
        let laser = PulseSpec::new(380.63 * THZ, 4770.0 * GHZ, -A, 0.0).unwrap();
        let grid = FrequencyGrid::centered(jsa.nu0 + laser.nu0, 30.0 * GHZ, 64).unwrap();
        let pts = TracedPoints { idler: 64, signal: 64 };
        assert!(matches!(traced_spectrum(&jsa, &laser, A, &grid, pts), Err(Error::Window { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(2000))]
            #[test]
            fn purity_never_decreases(
                s in 0.1e12f64..10e12, sc in 0.1e12f64..10e12, sl in 0.1e12f64..10e12, a_fs2 in 1e5f64..1e8
            ) {
                let r = purity_final(s, sc, sl, a_fs2 * FS2).unwrap();
                prop_assert!(r.purity_difference >= -1e-12);
                prop_assert!(r.purity_final > 0.0 && r.purity_final <= 1.0 + 1e-12);
                prop_assert!(r.purity_initial > 0.0 && r.purity_initial <= 1.0 + 1e-12);
                prop_assert!(r.renyi2_final >= -1e-12);
            }
        }
    }
}
