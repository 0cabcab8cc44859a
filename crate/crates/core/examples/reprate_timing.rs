//! Sensitivity of the output wavelength to the laser repetition rate when
//! photon and laser come from different pulses of the same train.
//!
//!     cargo run --release --example reprate_timing

use chirpsfg::quantities::units::*;
use chirpsfg::quantities::Estimate;
use chirpsfg::timing_sync::{estimate_pulse_offset, jitter_tolerance, reprate_sensitivity, wavelength_shift, PathTiming};

fn main() -> chirpsfg::Result<()> {
    let chirp = 26.2e6 * FS2;
    let rate = 80.0 * MHZ;
    let wl = 400.0 * NM;

    println!("{:>3} {:>12} {:>14}", "n", "nm/kHz", "ΔR for 0.04 nm");
    for n in [0, 1, 4, 12, 40] {
        let s = reprate_sensitivity(wl, chirp, rate, n)?;
        let tol = jitter_tolerance(0.04 * NM, wl, chirp, rate, n)?;
        println!("{:>3} {:>12.5} {:>11.1} Hz", n, s / NM_PER_KHZ, tol.max_detuning());
    }

    let timing = PathTiming::new(50.0 * NS, 100.0 * NS, 0.0, 12, rate)?;
    println!("t3 = {:.3} ns", timing.t3() / NS);
    for detuning in [10.0, 50.0, 334.0] {
        let shift = wavelength_shift(wl, chirp, rate, 12, detuning)?;
        println!("ΔR = {detuning:>5} Hz shifts the output by {:.4} nm", shift / NM);
    }

    let n = estimate_pulse_offset(
        Estimate::new(-0.0641 * NM_PER_PS, 0.0005 * NM_PER_PS),
        Estimate::new(0.1188 * NM_PER_KHZ, 0.0004 * NM_PER_KHZ),
        Estimate::exact(rate),
    )?;
    println!("pulse offset from the two slopes: {:.2} ± {:.2}", n.value, n.sigma);
    Ok(())
}
