//! Print the derived fracture reference quantities (K0, R0, sigma_hat)
//! for a range of phase-field length scales at fixed toughness, showing
//! how ell_f sets the strength ratio sigma_hat / sigma_Y.
//!
//! Run with: cargo run --example reference_quantities

use gradfrac::cases::reference_quantities;
use gradfrac::material::{Hardening, MaterialParams};
use gradfrac::phasefield::FractureParams;

fn main() {
    let mat = MaterialParams {
        e: 71_480.0,
        nu: 0.3,
        sigma_y: 345.0,
        hardening: Hardening::PowerLaw { exponent: 0.2 },
        ell_p: 0.0,
        m: 5.0,
        alpha: 0.5,
        taylor_factor: 3.06,
        nye_factor: 1.9,
        burgers: 2.5e-7,
    };
    println!(
        "E = {} MPa, nu = {}, sigma_Y = {} MPa, Gc = 9.31 N/mm",
        mat.e, mat.nu, mat.sigma_y
    );
    println!(
        "{:>10} {:>14} {:>10} {:>12} {:>16}",
        "ell_f[mm]", "K0[MPa*mm^.5]", "R0[mm]", "s_hat[MPa]", "s_hat/sigma_Y"
    );
    for ell_f in [0.05, 0.15, 0.3, 0.6, 1.2] {
        let frac = FractureParams { gc: 9.31, ell_f, kappa: 1e-7 };
        let q = reference_quantities(&mat, &frac);
        println!(
            "{:>10} {:>14.1} {:>10.3} {:>12.1} {:>16.3}",
            ell_f, q.k0, q.r0, q.sigma_hat, q.strength_ratio
        );
    }
    println!();
    println!("R0/ell_f = 256/(81 pi (1-nu^2)) * (sigma_hat/sigma_Y)^2 — independent of Gc.");
}
