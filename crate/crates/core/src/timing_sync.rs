//! Timing chain between the photon path and the laser path.
//!
//! The photon travels the source path t1 and a fibre t1′; the laser pulse
//! that meets it travels the stretcher path t2 but left the laser n pulses
//! later, so its arrival is `t3 = t2 + n/R`. Because the output frequency
//! follows the delay at π/A, any change of the repetition rate R moves the
//! output wavelength unless n = 0.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::{Estimate, SPEED_OF_LIGHT};

/// Path delays and pulse offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTiming {
    /// Source path, s.
    pub t1: f64,
    /// Fibre path, s.
    pub t1p: f64,
    /// Stretcher path, s.
    pub t2: f64,
    /// Pulse offset between the photon's pump pulse and the laser pulse.
    pub n: u32,
    /// Hz
    pub repetition_rate: f64,
}

impl PathTiming {
    pub fn new(t1: f64, t1p: f64, t2: f64, n: u32, repetition_rate: f64) -> Result<Self> {
        let pt = PathTiming { t1, t1p, t2, n, repetition_rate };
        pt.validate()?;
        Ok(pt)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.repetition_rate > 0.0) || !self.repetition_rate.is_finite() {
            return Err(Error::validation(format!("repetition rate must be positive, got {}", self.repetition_rate)));
        }
        if ![self.t1, self.t1p, self.t2].iter().all(|t| t.is_finite()) {
            return Err(Error::validation("path delays must be finite"));
        }
        Ok(())
    }

    /// Laser arrival `t2 + n/R`.
    pub fn t3(&self) -> f64 {
        self.t2 + self.n as f64 / self.repetition_rate
    }

    pub fn with_repetition_rate(self, repetition_rate: f64) -> Self {
        PathTiming { repetition_rate, ..self }
    }
}

/// `Δt = t2 + n/R - t1 - t1′`; positive when the laser arrives later.
pub fn timing_difference(pt: &PathTiming) -> f64 {
    pt.t3() - pt.t1 - pt.t1p
}

/// `dλ/dR = λ² n π / (c A R²)` in m/Hz for output wavelength λ.
pub fn reprate_sensitivity(wavelength: f64, chirp: f64, repetition_rate: f64, n: u32) -> Result<f64> {
    if chirp == 0.0 || !chirp.is_finite() {
        return Err(Error::domain("repetition-rate sensitivity needs a non-zero chirp"));
    }
    if !(repetition_rate > 0.0) || !(wavelength > 0.0) {
        return Err(Error::domain("wavelength and repetition rate must be positive"));
    }
    Ok(wavelength * wavelength * n as f64 * PI / (SPEED_OF_LIGHT * chirp * repetition_rate * repetition_rate))
}

/// Pulse offset `n = |dλ/dR| R² / |dλ/dΔτ|` from a delay scan slope and a
/// repetition-rate scan slope, with first-order error propagation.
///
/// Slope signs differ between conventions for the two scans, so only the
/// magnitudes enter and the result is positive by construction.
pub fn estimate_pulse_offset(slope_delay: Estimate, slope_reprate: Estimate, repetition_rate: Estimate) -> Result<Estimate> {
    if slope_delay.value == 0.0 || !slope_delay.value.is_finite() {
        return Err(Error::domain("delay slope must be finite and non-zero"));
    }
    if !(repetition_rate.value > 0.0) {
        return Err(Error::domain("repetition rate must be positive"));
    }
    let sd = slope_delay.value.abs();
    let sr = slope_reprate.value.abs();
    let r = repetition_rate.value;
    let n = sr * r * r / sd;
    let rel_r = if sr > 0.0 { slope_reprate.sigma / sr } else { 0.0 };
    let relative = ((slope_delay.sigma / sd).powi(2) + rel_r.powi(2) + (2.0 * repetition_rate.sigma / r).powi(2)).sqrt();
    let sigma = if sr > 0.0 { n * relative } else { slope_reprate.sigma * r * r / sd };
    Ok(Estimate::new(n, sigma))
}

/// Largest repetition-rate excursion that keeps the output wavelength shift
/// within a given linewidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "max_detuning_hz", rename_all = "snake_case")]
pub enum JitterTolerance {
    /// ΔR in Hz.
    Limited(f64),
    /// n = 0: the wavelength does not depend on R.
    Insensitive,
}

impl JitterTolerance {
    pub fn max_detuning(&self) -> f64 {
        match self {
            JitterTolerance::Limited(v) => *v,
            JitterTolerance::Insensitive => f64::INFINITY,
        }
    }
}

/// `ΔR = linewidth / (dλ/dR)`.
pub fn jitter_tolerance(linewidth: f64, wavelength: f64, chirp: f64, repetition_rate: f64, n: u32) -> Result<JitterTolerance> {
    if !(linewidth >= 0.0) {
        return Err(Error::domain("linewidth must be non-negative"));
    }
    if n == 0 {
        return Ok(JitterTolerance::Insensitive);
    }
    let s = reprate_sensitivity(wavelength, chirp, repetition_rate, n)?;
    Ok(JitterTolerance::Limited(linewidth / s.abs()))
}

/// Output wavelength shift caused by a repetition-rate detuning ΔR.
pub fn wavelength_shift(wavelength: f64, chirp: f64, repetition_rate: f64, n: u32, detuning: f64) -> Result<f64> {
    Ok(reprate_sensitivity(wavelength, chirp, repetition_rate, n)? * detuning)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::units::*;
    use crate::sfg_analytic::center_wavelength;

    const A: f64 = 26.2e6 * FS2;
    const R: f64 = 80.0 * MHZ;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn timing_difference_examples() {
        let pt = PathTiming::new(3.0 * NS, 2.0 * NS, 5.0 * NS, 0, R).unwrap();
        assert!(timing_difference(&pt).abs() < 1e-21);
        let pt = PathTiming::new(0.0, 0.0, 0.0, 12, R).unwrap();
        assert!(rel(timing_difference(&pt), 150.0 * NS) < 1e-12);

        let h = 1.0;
        let fd = (timing_difference(&pt.with_repetition_rate(R + h)) - timing_difference(&pt.with_repetition_rate(R - h)))
            / (2.0 * h);
        assert!(rel(fd, -12.0 / (R * R)) < 1e-6);
        assert!(PathTiming::new(0.0, 0.0, 0.0, 1, 0.0).is_err());
    }

    #[test]
    fn sensitivity_examples() {
        let s = reprate_sensitivity(400.0 * NM, A, R, 12).unwrap();
        assert!((s / NM_PER_KHZ - 0.1199).abs() < 1e-3, "{}", s / NM_PER_KHZ);
        assert!(rel(s, 0.1188 * NM_PER_KHZ) < 0.015);
        let per_pulse = reprate_sensitivity(400.0 * NM, A, R, 1).unwrap() / NM_PER_KHZ;
        assert!((per_pulse - 0.01).abs() < 0.001);
        assert_eq!(reprate_sensitivity(400.0 * NM, A, R, 0).unwrap(), 0.0);
        assert!(reprate_sensitivity(400.0 * NM, 0.0, R, 12).is_err());
    }

    #[test]
    fn sensitivity_is_the_chain_rule() {
        let (wl_p, wl_l) = (811.11 * NM, 787.62 * NM);
        let wl = wl_p * wl_l / (wl_p + wl_l);
        let pt = PathTiming::new(0.0, 0.0, 0.0, 12, R).unwrap();
        let dt0 = timing_difference(&pt);
        let lambda_at = |rate: f64| {
            let delay = timing_difference(&pt.with_repetition_rate(rate)) - dt0;
            center_wavelength(wl_p, wl_l, A, delay).unwrap().exact
        };
        let h = 10.0;
        let fd = (lambda_at(R + h) - lambda_at(R - h)) / (2.0 * h);
        assert!(rel(fd, reprate_sensitivity(wl, A, R, 12).unwrap()) < 1e-5);
    }

    #[test]
    fn pulse_offset_from_published_slopes() {
        let n = estimate_pulse_offset(
            Estimate::new(-0.0641 * NM_PER_PS, 0.0005 * NM_PER_PS),
            Estimate::new(0.1188 * NM_PER_KHZ, 0.0004 * NM_PER_KHZ),
            Estimate::exact(R),
        )
        .unwrap();
        assert!((n.value - 11.9).abs() < 0.05, "{}", n.value);
        assert!((n.sigma - 0.1).abs() < 0.02, "{}", n.sigma);
    }

    #[test]
    fn pulse_offset_round_trip() {
        let (wl_p, wl_l) = (811.11 * NM, 787.62 * NM);
        let wl = wl_p * wl_l / (wl_p + wl_l);
        for n in [1u32, 7, 12, 40] {
            let sr = reprate_sensitivity(wl, A, R, n).unwrap();
            let sd = crate::sfg_analytic::wavelength_delay_slope(wl_p, wl_l, A).unwrap();
            let est = estimate_pulse_offset(Estimate::exact(sd), Estimate::exact(sr), Estimate::exact(R)).unwrap();
            assert!((est.value - n as f64).abs() < 1e-9, "{}", est.value);
            assert_eq!(est.sigma, 0.0);
        }
        // doubling R needs four times the slope for the same n
        let sr = reprate_sensitivity(wl, A, R, 7).unwrap();
        let sr2 = reprate_sensitivity(wl, A, 2.0 * R, 7).unwrap();
        assert!(rel(sr, 4.0 * sr2) < 1e-12);
        assert!(estimate_pulse_offset(Estimate::exact(0.0), Estimate::exact(sr), Estimate::exact(R)).is_err());
    }

    #[test]
    fn jitter_examples() {
        let t = jitter_tolerance(0.04 * NM, 400.0 * NM, A, R, 12).unwrap().max_detuning();
        assert!((t - 334.0).abs() < 1.0, "{t}");
        assert!(rel(t, 300.0) < 0.15);
        let shift = wavelength_shift(400.0 * NM, A, R, 12, 10.0).unwrap();
        assert!((shift / NM - 0.0012).abs() < 0.0001);
        assert!(shift < 0.03 * 0.04 * NM);
        let shift50 = wavelength_shift(400.0 * NM, A, R, 12, 50.0).unwrap();
        assert!((shift50 / NM - 0.006).abs() < 0.0005);
        assert_eq!(jitter_tolerance(0.0, 400.0 * NM, A, R, 12).unwrap().max_detuning(), 0.0);
        assert_eq!(jitter_tolerance(0.04 * NM, 400.0 * NM, A, R, 0).unwrap(), JitterTolerance::Insensitive);
    }
}
