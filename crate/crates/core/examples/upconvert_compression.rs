//! Compress an 811 nm photon with a 788 nm laser of opposite chirp and
//! compare the numerically upconverted spectrum with the closed forms.
//!
//!     cargo run --release --example upconvert_compression

use chirpsfg::pulses::PulseSpec;
use chirpsfg::quantities::units::*;
use chirpsfg::quantities::wavelength_to_frequency;
use chirpsfg::sfg_analytic::{bandwidth_compressed, bandwidth_unchirped, predict};
use chirpsfg::sfg_numeric::{measure_spectrum, simulate, GridOptions};

fn main() -> chirpsfg::Result<()> {
    let chirp = 25.8e6 * FS2;
    let photon = PulseSpec::new(wavelength_to_frequency(811.11 * NM)?, 1740.0 * GHZ, chirp, 0.0)?;
    let laser = PulseSpec::new(wavelength_to_frequency(787.62 * NM)?, 4770.0 * GHZ, -chirp, 0.0)?;

    let report = predict(&photon, &laser)?;
    println!("closed form");
    println!("  output FWHM         {:.3} GHz", report.fwhm / GHZ);
    println!("  large-chirp limit   {:.3} GHz", bandwidth_compressed(photon.fwhm, laser.fwhm, chirp)? / GHZ);
    println!("  centre              {:.3} nm", report.center_wl / NM);
    println!("  compression         {:.1}", report.compression_ratio);
    let broadened = bandwidth_unchirped(photon.fwhm, laser.fwhm);
    println!("  without chirp       {:.0} GHz ({:.2}x broader)", broadened / GHZ, broadened / photon.fwhm);

    let spectrum = simulate(&photon, &laser, GridOptions::default())?.intensity();
    let measured = measure_spectrum(&spectrum)?;
    println!("numerical convolution");
    println!("  output FWHM         {:.3} GHz", measured.fwhm / GHZ);
    println!("  centre              {:.3} nm", measured.center_wl / NM);
    println!("  relative deviation  {:.2e}", (measured.fwhm - report.fwhm) / report.fwhm);
    Ok(())
}
