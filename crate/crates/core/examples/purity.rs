//! Purity of the signal photon before and after upconversion, checked
//! against brute-force quadrature of the reduced density matrix.
//!
//!     cargo run --release --example purity

use chirpsfg::entanglement::{purity_final, purity_final_by_quadrature, purity_initial_by_quadrature};

fn main() -> chirpsfg::Result<()> {
    // σ = 1 units
    println!("{:>6} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10}", "σc", "σL", "Aσ²", "initial", "final", "Rényi-2", "quadrature");
    for (sigma_c, sigma_l, a) in [(1.0, 1.0, 0.0), (0.5, 1.0, 0.2), (1.0, 0.5, 0.4), (2.0, 1.5, 0.1), (0.2, 1.0, 0.0)] {
        let report = purity_final(1.0, sigma_c, sigma_l, a)?;
        let quad = purity_final_by_quadrature(1.0, sigma_c, sigma_l, a, 80)?;
        println!(
            "{:>6.2} {:>6.2} {:>6.2} {:>10.6} {:>10.6} {:>10.4} {:>10.6}",
            sigma_c, sigma_l, a, report.purity_initial, report.purity_final, report.renyi2_final, quad
        );
    }
    let q = purity_initial_by_quadrature(1.0, 1.0, 96)?;
    println!("initial purity at σc = σ by quadrature: {q:.6} (√3/2 = {:.6})", 3f64.sqrt() / 2.0);
    Ok(())
}
