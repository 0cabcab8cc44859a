//! Fit a noisy measured spectrum, remove the spectrometer resolution and
//! report the compression ratio.
//!
//!     cargo run --release --example deconvolve_spectrum

use std::f64::consts::LN_2;
use std::io::Cursor;

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use chirpsfg::quantities::units::*;
use chirpsfg::quantities::{bandwidth_freq_to_wl, frequency_to_wavelength};
use chirpsfg::spectro_analysis::{
    background_subtract, deconvolve_resolution, fit_spectrum, read_spectrum_csv, MeasuredWidth,
};

fn main() -> chirpsfg::Result<()> {
    // a 74 GHz wide line at 399.7 nm, recorded in wavelength with a flat background
    let center = 399.70 * NM;
    let width = bandwidth_freq_to_wl(74.0 * GHZ, center)?;
    let mut rng = StdRng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.01).expect("valid");
    let mut signal = String::from("wavelength_nm,counts\n");
    let mut background = String::from("wavelength_nm,counts\n");
    for k in 0..400 {
        let wl = center + (k as f64 - 200.0) * width / 40.0;
        let line = (-4.0 * LN_2 * ((wl - center) / width).powi(2)).exp();
        signal.push_str(&format!("{},{}\n", wl / NM, 0.2 + line + noise.sample(&mut rng)));
        background.push_str(&format!("{},{}\n", wl / NM, 0.2));
    }

    let measured = read_spectrum_csv(Cursor::new(signal))?;
    let bg = read_spectrum_csv(Cursor::new(background))?;
    let sub = background_subtract(&measured, &bg)?;
    let fit = fit_spectrum(&sub.spectrum)?;
    println!(
        "fit: {:.4} nm, {:.2} ± {:.2} GHz ({:.4} nm)",
        frequency_to_wavelength(fit.fit.center)? / NM,
        fit.fit.fwhm / GHZ,
        fit.fit.fwhm_sigma / GHZ,
        fit.fwhm_wl / NM
    );

    let true_width = deconvolve_resolution(
        MeasuredWidth::new(fit.fit.fwhm, 4.0 * GHZ)?,
        MeasuredWidth::new(60.0 * GHZ, 4.0 * GHZ)?,
    )?;
    println!("after removing 60 ± 4 GHz resolution: {:.1} ± {:.1} GHz", true_width.value / GHZ, true_width.sigma / GHZ);
    println!("compression of a 1740 GHz photon: {:.0}:1", 1740.0 * GHZ / true_width.value);
    Ok(())
}
