//! Boundary-layer (small-scale yielding) crack growth resistance curve:
//! a semicircular domain loaded on its outer rim by the Williams
//! K-field, with an AT2 phase-field crack and CMSG plasticity at the tip.
//! Uses configs/bl_flat.toml (sigma_hat / sigma_Y = 0.5, flat R-curve)
//! unless a config path is given.
//!
//! Run with: cargo run --release --example boundary_layer_rcurve [config.toml]

use gradfrac::cases::reference_quantities;
use gradfrac::io::{parse_config, run_config};
use std::path::PathBuf;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/bl_flat.toml")
        });
    let cfg = parse_config(&path).expect("config");
    let q = reference_quantities(&cfg.material, &cfg.fracture);
    let records = run_config(&cfg).expect("run");

    println!("\nR-curve (load-driven; delta_a jumps when K exceeds the resistance):");
    println!("{:>10} {:>10}", "K_I/K0", "delta_a/R0");
    for r in &records {
        if r.delta_a > 0.0 {
            println!("{:>10.3} {:>10.3}", r.load / q.k0, r.delta_a / q.r0);
        }
    }
    println!("\ncurves: {}/rcurve.csv", cfg.output.directory.display());
}
