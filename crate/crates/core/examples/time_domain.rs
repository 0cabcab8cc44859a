//! Temporal picture of chirped SFG: both pulses are stretched to picoseconds
//! with opposite frequency sweeps, and their product has a nearly constant
//! instantaneous frequency. The output spectrum is computed both by direct
//! convolution and through the time-domain product.
//!
//!     cargo run --release --example time_domain

use chirpsfg::pulses::{synthesize_default, time_envelope, PulseSpec};
use chirpsfg::quantities::units::*;
use chirpsfg::quantities::wavelength_to_frequency;
use chirpsfg::sfg_numeric::{classical_product_check, common_sampling};

fn main() -> chirpsfg::Result<()> {
    let chirp = 25.8e6 * FS2;
    let photon = PulseSpec::new(wavelength_to_frequency(811.11 * NM)?, 1740.0 * GHZ, chirp, 0.0)?;
    let laser = PulseSpec::new(wavelength_to_frequency(787.62 * NM)?, 4770.0 * GHZ, -chirp, 0.0)?;

    for (name, spec) in [("photon", &photon), ("laser", &laser)] {
        let env = time_envelope(&synthesize_default(spec, 1 << 13)?);
        let inst = env.instantaneous_frequency();
        let intensity = env.intensity();
        let peak = intensity.iter().cloned().fold(0.0, f64::max);
        // frequency sweep across the half-maximum region
        let inside: Vec<usize> = (0..inst.len()).filter(|&j| intensity[j] > 0.5 * peak && inst[j].is_finite()).collect();
        let (first, last) = (inside[0], inside[inside.len() - 1]);
        println!(
            "{name:>6}: duration {:.2} ps, sweep {:+.0} GHz across the half maximum",
            env.duration()? / PS,
            (inst[last] - inst[first]) / GHZ
        );
    }

    let (step, count) = common_sampling(&photon, &laser)?;
    let deviation = classical_product_check(&photon, &laser, step, count)?;
    println!("{count} samples at {:.3} GHz: frequency and time routes differ by {deviation:.2e}", step / GHZ);
    let coarse = classical_product_check(&photon, &laser, 64.0 * step, count / 64)?;
    println!("64x coarser sampling: {coarse:.2e}");
    Ok(())
}
