use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{measure_fwhm, measure_peak, SpectralAmplitude};
use crate::error::Result;

/// Complex temporal envelope sampled on `t_j = (j - N/2) dt`.
///
/// The transform convention is
///
/// ```text
/// e(t) = Σ_k E(ν_k) exp(-2πi (ν_k - ν_ref) t) Δν
/// ```
///
/// so a spectral phase `2π(ν-ν0)τ` moves the envelope to `t = +τ`, a chirp
/// `A(ν-ν0)²` with A > 0 makes the instantaneous frequency rise at π/A, and
/// `Σ|e|² dt = Σ|E|² Δν`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeEnvelope {
    pub reference_frequency: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
}

impl TimeEnvelope {
    pub fn time(&self, j: usize) -> f64 {
        (j as f64 - (self.values.len() / 2) as f64) * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|j| self.time(j)).collect()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dt
    }

    /// Intensity FWHM in seconds.
    pub fn duration(&self) -> Result<f64> {
        measure_fwhm(&self.times(), &self.intensity())
    }

    pub fn peak_time(&self) -> Result<f64> {
        Ok(measure_peak(&self.times(), &self.intensity())?.position)
    }

    /// Instantaneous frequency `ν_ref - (1/2π) dψ/dt` by central differences
    /// of the unwrapped phase ψ; the first and last samples are left as NaN.
    pub fn instantaneous_frequency(&self) -> Vec<f64> {
        let n = self.values.len();
        let mut out = vec![f64::NAN; n];
        for j in 1..n.saturating_sub(1) {
            // phase difference across two samples, wrapped to (-π, π]
            let dpsi = (self.values[j + 1] * self.values[j - 1].conj()).arg();
            out[j] = self.reference_frequency - dpsi / (2.0 * PI * 2.0 * self.dt);
        }
        out
    }
}

/// Transform a sampled spectrum to its temporal envelope. Grids whose size
/// is not a power of two are zero-padded on the high-frequency side.
pub fn time_envelope(amp: &SpectralAmplitude) -> TimeEnvelope {
    let grid = amp.grid();
    let n = grid.count.next_power_of_two();
    let mut buf: Vec<Complex64> = amp.values().iter().map(|v| v * grid.step).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));

    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);

    // Reference at sample n/2: exp(+2πi (n/2) Δν t_j) = (-1)^j, and rotate so
    // that t = 0 sits at index n/2.
    let reference_frequency = grid.start + (n / 2) as f64 * grid.step;
    let values = (0..n)
        .map(|j| {
            let src = (j + n / 2) % n;
            let sign = if src % 2 == 0 { 1.0 } else { -1.0 };
            buf[src] * sign
        })
        .collect();
    TimeEnvelope { reference_frequency, dt: 1.0 / (n as f64 * grid.step), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulses::{synthesize, FrequencyGrid, PulseSpec};
    use crate::quantities::units::*;
    use std::f64::consts::LN_2;

    fn wide_grid(spec: &PulseSpec, span_widths: f64, count: usize) -> FrequencyGrid {
        FrequencyGrid::anchored(spec.nu0, span_widths * spec.fwhm / count as f64, count).unwrap()
    }

    #[test]
    fn transform_limited_duration() {
        let spec = PulseSpec::new(370.0 * THZ, 1.0 * THZ, 0.0, 0.0).unwrap();
        let amp = synthesize(&spec, &wide_grid(&spec, 64.0, 4096)).unwrap();
        let env = time_envelope(&amp);
        let expected = 2.0 * LN_2 / (PI * spec.fwhm);
        let d = env.duration().unwrap();
        assert!(((d - expected) / expected).abs() < 0.01, "{d:e} vs {expected:e}");
    }

    #[test]
    fn parseval_holds() {
        let spec = PulseSpec::new(370.0 * THZ, 1.74 * THZ, 25.8e6 * FS2, 2.0 * PS).unwrap();
        let amp = synthesize(&spec, &FrequencyGrid::for_pulse(&spec, 4096).unwrap()).unwrap();
        let env = time_envelope(&amp);
        assert!(((env.energy() - amp.energy()) / amp.energy()).abs() < 1e-9);
    }

    #[test]
    fn non_power_of_two_is_padded() {
        let spec = PulseSpec::new(370.0 * THZ, 1.0 * THZ, 0.0, 0.0).unwrap();
        let grid = FrequencyGrid::anchored(spec.nu0, 10e9, 1000).unwrap();
        let amp = synthesize(&spec, &grid).unwrap();
        let env = time_envelope(&amp);
        assert_eq!(env.values.len(), 1024);
        assert!(((env.energy() - amp.energy()) / amp.energy()).abs() < 1e-9);
    }

    #[test]
    fn delay_moves_the_envelope() {
        let spec = PulseSpec::new(370.0 * THZ, 1.0 * THZ, 0.0, 1.5 * PS).unwrap();
        let amp = synthesize(&spec, &wide_grid(&spec, 64.0, 4096)).unwrap();
        let t = time_envelope(&amp).peak_time().unwrap();
        assert!((t - 1.5 * PS).abs() < 1e-3 * PS, "{t:e}");
    }

    #[test]
    fn chirp_stretches_and_sweeps_at_pi_over_a() {
        let a = 25.8e6 * FS2;
        let spec = PulseSpec::new(369.6 * THZ, 1740.0 * GHZ, a, 0.0).unwrap();
        assert!((a * a * spec.fwhm.powi(4) - 6.1e3).abs() < 100.0);
        let grid = FrequencyGrid::for_pulse(&spec, 1 << 14).unwrap();
        let env = time_envelope(&synthesize(&spec, &grid).unwrap());

        let tl = 2.0 * LN_2 / (PI * spec.fwhm);
        let stretched = tl * a * spec.fwhm * spec.fwhm / 4f64.ln();
        let d = env.duration().unwrap();
        assert!(((d - stretched) / stretched).abs() < 0.01, "{d:e} vs {stretched:e}");

        // slope of the instantaneous frequency over the central half FWHM
        let times = env.times();
        let inst = env.instantaneous_frequency();
        let pts: Vec<(f64, f64)> = times
            .iter()
            .zip(&inst)
            .filter(|(t, f)| t.abs() < 0.25 * d && f.is_finite())
            .map(|(t, f)| (*t, *f))
            .collect();
        let n = pts.len() as f64;
        let (st, sf) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mt, mf) = (st / n, sf / n);
        let slope = pts.iter().map(|p| (p.0 - mt) * (p.1 - mf)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mt).powi(2)).sum::<f64>();
        let expected = PI / a;
        assert!(((slope - expected) / expected).abs() < 0.01, "{slope:e} vs {expected:e}");
    }
}
