//! Single-Gauss-point uniaxial stress-strain curves from the CMSG
//! viscoplastic update, at several imposed plastic strain gradient
//! levels. Reproduces the gradient-strengthening effect: the flow stress
//! scales with sqrt(f^2 + ell_p eta_p).
//!
//! Run with: cargo run --example uniaxial_response

use gradfrac::material::{uniaxial_stress_path, Hardening, MaterialParams};

fn main() {
    let mat = MaterialParams {
        e: 200_000.0,
        nu: 0.3,
        sigma_y: 600.0, // sigma_Y / E = 0.003
        hardening: Hardening::PowerLaw { exponent: 0.2 },
        ell_p: 5e-3, // mm (microns scale, where gradients bite)
        m: 5.0,
        alpha: 0.5,
        taylor_factor: 3.06,
        nye_factor: 1.9,
        burgers: 2.5e-7,
    };
    let eps_max = 0.02;
    let n = 40;
    // eta_p in 1/mm; 0 recovers conventional plasticity exactly.
    let etas = [0.0, 1e3, 1e4, 1e5];
    let curves: Vec<Vec<(f64, f64)>> = etas
        .iter()
        .map(|&eta| uniaxial_stress_path(&mat, eta, eps_max, n).expect("path"))
        .collect();

    print!("{:>9}", "eps");
    for eta in etas {
        print!(" {:>14}", format!("eta={eta:.0e}"));
    }
    println!("   (stress in MPa)");
    for i in (0..=n).step_by(4) {
        print!("{:>9.4}", curves[0][i].0);
        for c in &curves {
            print!(" {:>14.1}", c[i].1);
        }
        println!();
    }
}
