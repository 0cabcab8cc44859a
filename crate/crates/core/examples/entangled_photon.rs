//! Upconvert one photon of a frequency-correlated pair: traced output
//! spectrum against the closed form, from anticorrelated to separable, and
//! the pure photon left by heralding on the idler.
//!
//!     cargo run --release --example entangled_photon

use chirpsfg::entanglement::{
    entangled_sfg_bandwidth, heralded_photon, purity_final, traced_spectrum_auto, JsaSpec, TracedPoints,
};
use chirpsfg::pulses::PulseSpec;
use chirpsfg::quantities::units::*;
use chirpsfg::quantities::{wavelength_to_frequency, FWHM_PER_RMS};
use chirpsfg::sfg_numeric::{measure_spectrum, simulate, GridOptions};

fn main() -> chirpsfg::Result<()> {
    let chirp = 25.8e6 * FS2;
    let sigma = 1740.0 * GHZ / FWHM_PER_RMS;
    let laser = PulseSpec::new(wavelength_to_frequency(787.62 * NM)?, 4770.0 * GHZ, -chirp, 0.0)?;
    let sigma_l = laser.fwhm / FWHM_PER_RMS;
    let nu0 = wavelength_to_frequency(811.11 * NM)?;

    println!("{:>8} {:>12} {:>12} {:>12} {:>10} {:>10}", "σc/σ", "marginal", "traced", "closed", "purity", "after");
    for ratio in [0.3, 1.0, 3.0, 10.0, 100.0] {
        let jsa = JsaSpec::new(nu0, sigma, ratio * sigma)?;
        let spectrum = traced_spectrum_auto(&jsa, &laser, chirp, 301, TracedPoints { idler: 256, signal: 256 })?;
        let traced = spectrum.fwhm()?;
        let closed = entangled_sfg_bandwidth(sigma, ratio * sigma, sigma_l, chirp)?;
        let purity = purity_final(sigma, ratio * sigma, sigma_l, chirp)?;
        println!(
            "{:>8.1} {:>8.1} GHz {:>8.3} GHz {:>8.3} GHz {:>10.5} {:>10.5}",
            ratio,
            jsa.marginal_bandwidth() / GHZ,
            traced / GHZ,
            closed / GHZ,
            purity.purity_initial,
            purity.purity_final
        );
    }

    let jsa = JsaSpec::new(nu0, sigma, sigma)?;
    let photon = heralded_photon(&jsa, nu0 + 500.0 * GHZ, chirp)?;
    let out = measure_spectrum(&simulate(&photon, &laser, GridOptions::default())?.intensity())?;
    println!(
        "heralded at +500 GHz: photon {:.2} THz, {:.1} GHz wide -> output {:.3} GHz at {:.3} nm",
        photon.nu0 / THZ,
        photon.fwhm / GHZ,
        out.fwhm / GHZ,
        out.center_wl / NM
    );
    Ok(())
}
