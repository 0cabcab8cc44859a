//! Tune the output wavelength with the photon-laser delay, fit the slope
//! and invert it for the chirp.
//!
//!     cargo run --release --example delay_tuning

use chirpsfg::pulses::PulseSpec;
use chirpsfg::quantities::units::*;
use chirpsfg::quantities::wavelength_to_frequency;
use chirpsfg::sfg_analytic::{chirp_from_wavelength_slope, overlap_and_range, wavelength_delay_slope};
use chirpsfg::sfg_numeric::{delay_scan, GridOptions};
use chirpsfg::spectro_analysis::fit_line;

fn main() -> chirpsfg::Result<()> {
    let (wl_p, wl_l) = (811.11 * NM, 787.62 * NM);
    let chirp = 25.8e6 * FS2;
    let photon = PulseSpec::new(wavelength_to_frequency(wl_p)?, 1740.0 * GHZ, chirp, 0.0)?;
    let laser = PulseSpec::new(wavelength_to_frequency(wl_l)?, 4770.0 * GHZ, -chirp, 0.0)?;

    let delays: Vec<f64> = (-6..=6).map(|k| k as f64 * 2.5 * PS).collect();
    let rows = delay_scan(&photon, &laser, &delays, GridOptions::default())?;

    println!("{:>9} {:>12} {:>10} {:>10} {:>10}", "delay/ps", "centre/nm", "FWHM/GHz", "peak", "overlap");
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for row in rows {
        let row = row?;
        let overlap = overlap_and_range(row.delay, chirp, photon.fwhm, laser.fwhm)?.overlap;
        println!(
            "{:>9.2} {:>12.4} {:>10.3} {:>10.4} {:>10.4}",
            row.delay / PS,
            row.center_wl / NM,
            row.fwhm / GHZ,
            row.peak_intensity,
            overlap
        );
        x.push(row.delay);
        y.push(row.center_wl);
    }

    let fit = fit_line(&x, &y)?;
    let predicted = wavelength_delay_slope(wl_p, wl_l, chirp)?;
    println!("fitted slope     {:.5} ± {:.5} nm/ps", fit.slope / NM_PER_PS, fit.slope_sigma / NM_PER_PS);
    println!("predicted slope  {:.5} nm/ps", predicted / NM_PER_PS);
    let recovered = chirp_from_wavelength_slope(wl_p, wl_l, fit.slope)?;
    println!("recovered chirp  {:.3}e6 fs²", recovered / (1e6 * FS2));
    Ok(())
}
