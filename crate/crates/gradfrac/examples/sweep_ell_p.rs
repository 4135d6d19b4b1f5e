//! Programmatic parameter sweep: rerun the flat-R-curve boundary-layer
//! config for several plastic length scales and compare the stress
//! intensity at crack initiation. Equivalent to
//!   gradfrac sweep configs/bl_flat.toml --param material.ell_p --values ...
//! but using the library API directly.
//!
//! Run with: cargo run --release --example sweep_ell_p

use gradfrac::cases::reference_quantities;
use gradfrac::io::{parse_config, run_config};
use std::path::PathBuf;

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/bl_flat.toml");
    let base = parse_config(&path).expect("config");
    let q = reference_quantities(&base.material, &base.fracture);

    println!("{:>10} {:>12} {:>12}", "ell_p[mm]", "ell_p/R0", "K_init/K0");
    for ell_p in [0.0, 1.0, 3.0] {
        let mut cfg = base.clone();
        cfg.material.ell_p = ell_p;
        cfg.output.directory = base.output.directory.join(format!("ell_p={ell_p}"));
        let records = run_config(&cfg).expect("run");
        let k_init = records
            .iter()
            .find(|r| r.delta_a > 0.0)
            .map(|r| r.load / q.k0);
        match k_init {
            Some(k) => println!("{ell_p:>10} {:>12.2} {k:>12.3}", ell_p / q.r0),
            None => println!("{ell_p:>10} {:>12.2} {:>12}", ell_p / q.r0, "no growth"),
        }
    }
}
