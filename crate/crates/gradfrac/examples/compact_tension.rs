//! Compact-tension specimen simulation: pin-loaded half-model with a
//! phase-field crack growing along the symmetry ligament. Prints the
//! force-displacement curve and the peak load. Uses configs/ct.toml
//! unless a config path is given; sweep material.ell_p to see the peak
//! load drop with the gradient length scale.
//!
//! Run with: cargo run --release --example compact_tension [config.toml]
//! (takes several minutes at the shipped mesh)

use gradfrac::io::{parse_config, run_config};
use std::path::PathBuf;

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/ct.toml")
        });
    let cfg = parse_config(&path).expect("config");
    let b = cfg.case.thickness();
    let records = run_config(&cfg).expect("run");

    println!("\n{:>10} {:>12} {:>12}", "u[mm]", "force[kN]", "delta_a[mm]");
    for r in &records {
        println!(
            "{:>10.4} {:>12.3} {:>12.3}",
            r.load,
            r.reaction * b / 1000.0,
            r.delta_a
        );
    }
    let peak = records
        .iter()
        .map(|r| r.reaction * b / 1000.0)
        .fold(f64::NEG_INFINITY, f64::max);
    println!("\npeak load: {peak:.2} kN (thickness {b} mm)");
    println!("curves: {}/force_displacement.csv", cfg.output.directory.display());
}
