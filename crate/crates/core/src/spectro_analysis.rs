//! Post-processing of measured spectra: background subtraction, Gaussian
//! fits, deconvolution of the spectrometer resolution and straight-line fits
//! of scan data.
//!
//! Spectra are read from two-column CSV with a header whose first token
//! names the abscissa: `wavelength_nm` or `frequency_hz`.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulses::{fit_gaussian, GaussianFit};
use crate::quantities::{bandwidth_freq_to_wl, frequency_to_wavelength, units::NM, wavelength_to_frequency};

/// A width with its 1-σ uncertainty, both in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredWidth {
    pub value: f64,
    pub sigma: f64,
}

impl MeasuredWidth {
    pub fn new(value: f64, sigma: f64) -> Result<Self> {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::validation(format!("width must be non-negative, got {value}")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::validation(format!("uncertainty must be non-negative, got {sigma}")));
        }
        Ok(MeasuredWidth { value, sigma })
    }
}

/// True width behind a Gaussian instrument response,
/// `sqrt(M² - R²)`, with `σ = sqrt((M σ_M)² + (R σ_R)²) / value`.
pub fn deconvolve_resolution(measured: MeasuredWidth, resolution: MeasuredWidth) -> Result<MeasuredWidth> {
    if resolution.value == 0.0 {
        return Ok(measured);
    }
    if !(measured.value > resolution.value) {
        return Err(Error::domain(format!(
            "measured width {:.4e} Hz does not exceed the resolution {:.4e} Hz; the signal would be narrower than the instrument",
            measured.value, resolution.value
        )));
    }
    let (m, r) = (measured.value, resolution.value);
    let value = (m * m - r * r).sqrt();
    let sigma = (m * measured.sigma).hypot(r * resolution.sigma) / value;
    Ok(MeasuredWidth { value, sigma })
}

/// Independent uncertainties added in quadrature.
pub fn combine_uncertainty(fit_sigma: f64, resolution_sigma: f64) -> Result<f64> {
    if !(fit_sigma >= 0.0) || !(resolution_sigma >= 0.0) {
        return Err(Error::domain("uncertainties must be non-negative"));
    }
    Ok(fit_sigma.hypot(resolution_sigma))
}

/// Physical meaning of the abscissa of a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Values in m.
    Wavelength,
    /// Values in Hz.
    Frequency,
}

/// Samples `y(x)` with x strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSpectrum {
    pub axis: Axis,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SampledSpectrum {
    pub fn new(axis: Axis, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::validation(format!("{} abscissae for {} samples", x.len(), y.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::validation("spectrum contains non-finite values"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::validation("abscissae must be strictly increasing"));
        }
        Ok(SampledSpectrum { axis, x, y })
    }

    /// Same samples on a frequency axis (ν = c/λ), reordered to increase.
    /// Values are carried over per sample without a Jacobian, as recorded by
    /// a spectrometer with fixed pixels.
    pub fn to_frequency(&self) -> Result<SampledSpectrum> {
        match self.axis {
            Axis::Frequency => Ok(self.clone()),
            Axis::Wavelength => {
                let mut x = Vec::with_capacity(self.x.len());
                for wl in self.x.iter().rev() {
                    x.push(wavelength_to_frequency(*wl)?);
                }
                let y = self.y.iter().rev().copied().collect();
                SampledSpectrum::new(Axis::Frequency, x, y)
            }
        }
    }
}

/// Read a two-column CSV spectrum. The header's first token selects the
/// axis (`wavelength_nm` or `frequency_hz`); wavelengths are stored in m.
pub fn read_spectrum_csv<R: Read>(reader: R) -> Result<SampledSpectrum> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::validation(format!("unreadable CSV header: {e}")))?.clone();
    let (axis, scale) = match headers.get(0) {
        Some("wavelength_nm") => (Axis::Wavelength, NM),
        Some("frequency_hz") => (Axis::Frequency, 1.0),
        other => {
            return Err(Error::validation(format!(
                "first header token must be wavelength_nm or frequency_hz, got {:?}",
                other.unwrap_or("")
            )))
        }
    };
    if headers.len() != 2 {
        return Err(Error::validation(format!("expected two columns, header has {}", headers.len())));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::validation(format!("CSV row {}: {e}", line + 2)))?;
        let parse = |k: usize| -> Result<f64> {
            record
                .get(k)
                .ok_or_else(|| Error::validation(format!("CSV row {} has no column {}", line + 2, k + 1)))?
                .parse::<f64>()
                .map_err(|e| Error::validation(format!("CSV row {}: {e}", line + 2)))
        };
        x.push(parse(0)? * scale);
        y.push(parse(1)?);
    }
    SampledSpectrum::new(axis, x, y)
}

/// Result of a background subtraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subtracted {
    pub spectrum: SampledSpectrum,
    /// Fraction of samples at or below the background, set to zero.
    pub clamped_fraction: f64,
}

/// Pointwise `signal - background`, clamped at zero.
pub fn background_subtract(signal: &SampledSpectrum, background: &SampledSpectrum) -> Result<Subtracted> {
    let same_grid = signal.axis == background.axis
        && signal.x.len() == background.x.len()
        && signal.x.iter().zip(&background.x).all(|(a, b)| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()));
    if !same_grid {
        return Err(Error::validation("signal and background are sampled on different grids"));
    }
    let mut clamped = 0usize;
    let y = signal
        .y
        .iter()
        .zip(&background.y)
        .map(|(s, b)| {
            let d = s - b;
            if d <= 0.0 {
                clamped += 1;
                0.0
            } else {
                d
            }
        })
        .collect();
    let n = signal.x.len().max(1);
    Ok(Subtracted {
        spectrum: SampledSpectrum { axis: signal.axis, x: signal.x.clone(), y },
        clamped_fraction: clamped as f64 / n as f64,
    })
}

/// Gaussian fit of a spectrum in frequency with the width also expressed in
/// wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    /// Fit on the frequency axis (Hz).
    pub fit: GaussianFit,
    /// m
    pub center_wl: f64,
    /// m
    pub fwhm_wl: f64,
    /// m
    pub fwhm_wl_sigma: f64,
}

pub fn fit_spectrum(spectrum: &SampledSpectrum) -> Result<SpectrumFit> {
    let freq = spectrum.to_frequency()?;
    let fit = fit_gaussian(&freq.x, &freq.y)?;
    let center_wl = frequency_to_wavelength(fit.center)?;
    Ok(SpectrumFit {
        fit,
        center_wl,
        fwhm_wl: bandwidth_freq_to_wl(fit.fwhm, center_wl)?,
        fwhm_wl_sigma: bandwidth_freq_to_wl(fit.fwhm_sigma, center_wl)?,
    })
}

/// Ordinary least-squares line with standard errors from the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
    pub points: usize,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::validation(format!("{} abscissae for {} samples", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::validation(format!("a line fit needs at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::validation("line fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (nf - 2.0);
    Ok(LineFit {
        slope,
        intercept,
        slope_sigma: (s2 / sxx).sqrt(),
        intercept_sigma: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::units::*;
    use std::f64::consts::LN_2;

    fn w(value: f64, sigma: f64) -> MeasuredWidth {
        MeasuredWidth::new(value * GHZ, sigma * GHZ).unwrap()
    }

    #[test]
    fn deconvolution_examples() {
        let d = deconvolve_resolution(w(74.0, 4.0), w(60.0, 4.0)).unwrap();
        assert!((d.value / GHZ - 43.31).abs() < 0.01, "{}", d.value / GHZ);
        assert!((d.sigma / GHZ - 8.80).abs() < 0.01, "{}", d.sigma / GHZ);
        assert_eq!((d.value / GHZ).round(), 43.0);
        assert_eq!((d.sigma / GHZ).round(), 9.0);

        let d = deconvolve_resolution(w(67.0, 4.0), w(60.0, 4.0)).unwrap();
        assert_eq!((d.value / GHZ).round(), 30.0);
        assert_eq!((d.sigma / GHZ).round(), 12.0);

        let d = deconvolve_resolution(w(67.0, 4.0), w(0.0, 0.0)).unwrap();
        assert_eq!(d, w(67.0, 4.0));
        assert!(matches!(deconvolve_resolution(w(60.0, 4.0), w(60.0, 4.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn deconvolution_inverts_convolution() {
        for &(a, b) in &[(43.0, 60.0), (1.0, 100.0), (500.0, 3.0)] {
            let m = f64::hypot(a, b);
            let d = deconvolve_resolution(w(m, 0.0), w(b, 0.0)).unwrap();
            assert!(((d.value / GHZ - a) / a).abs() < 1e-12);
        }
    }

    #[test]
    fn uncertainty_grows_near_the_resolution() {
        let mut last = 0.0;
        for m in [100.0, 80.0, 70.0, 65.0, 62.0, 61.0, 60.5] {
            let s = deconvolve_resolution(w(m, 4.0), w(60.0, 4.0)).unwrap().sigma;
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn combined_uncertainty() {
        assert!((combine_uncertainty(1.0, 4.0).unwrap() - 4.1231).abs() < 1e-4);
        assert_eq!(combine_uncertainty(1.0, 4.0).unwrap().round(), 4.0);
        assert_eq!(combine_uncertainty(0.0, 2.5).unwrap(), 2.5);
        assert_eq!(combine_uncertainty(3.0, 4.0).unwrap(), 5.0);
    }

    fn gaussian_spectrum(offset: f64) -> SampledSpectrum {
        let x: Vec<f64> = (0..300).map(|k| 749.5 * THZ + k as f64 * 5.0 * GHZ).collect();
        let y = x
            .iter()
            .map(|v| offset + 100.0 * (-4.0 * LN_2 * (v - 750.25 * THZ).powi(2) / (74.0 * GHZ).powi(2)).exp())
            .collect();
        SampledSpectrum::new(Axis::Frequency, x, y).unwrap()
    }

    #[test]
    fn background_subtraction() {
        let clean = gaussian_spectrum(0.0);
        let zero = SampledSpectrum::new(Axis::Frequency, clean.x.clone(), vec![0.0; clean.x.len()]).unwrap();
        let s = background_subtract(&clean, &zero).unwrap();
        assert_eq!(s.spectrum, clean);
        assert_eq!(s.clamped_fraction, 0.0);

        let s = background_subtract(&clean, &clean).unwrap();
        assert!(s.spectrum.y.iter().all(|v| *v == 0.0));
        assert_eq!(s.clamped_fraction, 1.0);

        let noisy = gaussian_spectrum(7.5);
        let flat = SampledSpectrum::new(Axis::Frequency, clean.x.clone(), vec![7.5; clean.x.len()]).unwrap();
        let sub = background_subtract(&noisy, &flat).unwrap().spectrum;
        let a = fit_spectrum(&sub).unwrap().fit.fwhm;
        let b = fit_spectrum(&clean).unwrap().fit.fwhm;
        assert!(((a - b) / b).abs() < 1e-3);

        let shifted = SampledSpectrum::new(Axis::Frequency, clean.x.iter().map(|v| v + 1.0 * GHZ).collect(), clean.y.clone()).unwrap();
        assert!(background_subtract(&clean, &shifted).is_err());
    }

    #[test]
    fn csv_in_wavelength() {
        let mut text = String::from("wavelength_nm,counts\n");
        for k in 0..200 {
            let wl = 399.0 + k as f64 * 0.005;
            let c = 1000.0 * (-4.0 * LN_2 * ((wl - 399.5) / 0.04).powi(2)).exp();
            text.push_str(&format!("{wl},{c}\n"));
        }
        let s = read_spectrum_csv(text.as_bytes()).unwrap();
        assert_eq!(s.axis, Axis::Wavelength);
        let fit = fit_spectrum(&s).unwrap();
        assert!((fit.center_wl / NM - 399.5).abs() < 1e-4);
        assert!((fit.fwhm_wl / NM - 0.04).abs() < 2e-4, "{}", fit.fwhm_wl / NM);

        assert!(read_spectrum_csv("time_s,counts\n1,2\n".as_bytes()).is_err());
        assert!(read_spectrum_csv("frequency_hz,counts\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn line_fit() {
        let x = [-15.0, -5.0, 0.0, 5.0, 15.0];
        let y: Vec<f64> = x.iter().map(|v| 399.6 - 0.0648 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.0648).abs() < 1e-12);
        assert!(f.slope_sigma < 1e-12);
        assert!(fit_line(&x[..2], &y[..2]).is_err());
    }
}
