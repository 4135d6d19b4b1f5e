//! Homogeneous AT2 response of a 1D linear-elastic bar: damage and
//! degraded stress versus strain, with the closed-form strength
//! sigma_hat = sqrt(27 E Gc / (256 ell_f)) marked.
//!
//! Run with: cargo run --example homogeneous_damage

use gradfrac::phasefield::{homogeneous_response, strength, FractureParams};

fn main() {
    let e = 71_480.0;
    let frac = FractureParams {
        gc: 9.31,
        ell_f: 0.15,
        kappa: 1e-7,
    };
    let sh = strength(&frac, e);
    println!("E = {e} MPa, Gc = {} N/mm, ell_f = {} mm", frac.gc, frac.ell_f);
    println!("closed-form strength sigma_hat = {sh:.1} MPa\n");
    println!("{:>9} {:>8} {:>12}", "eps", "phi", "sigma[MPa]");
    let mut peak: f64 = 0.0;
    for i in 0..=30 {
        let eps = 0.05 * i as f64 / 30.0;
        let (phi, sigma) = homogeneous_response(eps, e, &frac);
        peak = peak.max(sigma);
        println!("{eps:>9.4} {phi:>8.4} {sigma:>12.2}");
    }
    println!("\nswept peak {peak:.1} MPa vs sigma_hat {sh:.1} MPa");
}
