//! Relax a seeded crack in a 1D strip (no mechanical load) and recover
//! the optimal AT2 profile phi(x) = exp(-|x|/ell_f) together with the
//! regularized surface energy, which converges to Gc per unit ligament.
//!
//! Run with: cargo run --example crack_profile

use gradfrac::material::{Hardening, MaterialParams};
use gradfrac::mesh::{jacobian_map_coords, shape_q8, MeshBuilder, QuadratureRule};
use gradfrac::phasefield::{crack_density, FractureParams};
use gradfrac::solver::{
    run_loadpath, BcProgram, CaseSetup, DirichletBc, SolverConfig,
};

fn main() {
    let frac = FractureParams { gc: 9.31, ell_f: 0.5, kappa: 1e-7 };
    let h = frac.ell_f / 5.0;
    let l = 6.0 * frac.ell_f;
    let n = (2.0 * l / h).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| -l + 2.0 * l * i as f64 / n as f64).collect();
    let mut b = MeshBuilder::new();
    b.add_grid(&xs, &[0.0, h], |x, y| [x, y]);
    let mesh = b.into_q8();

    let mut phi_ones = Vec::new();
    let mut dirichlet = Vec::new();
    for nd in &mesh.nodes {
        dirichlet.push(DirichletBc { node: nd.id, comp: 0, value_per_load: 0.0 });
        dirichlet.push(DirichletBc { node: nd.id, comp: 1, value_per_load: 0.0 });
        if nd.coords[0].abs() < 1e-12 {
            phi_ones.push(nd.id);
        }
    }
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
    let setup = CaseSetup {
        bc: BcProgram { dirichlet, phi_ones, load_max: 0.0, reaction: vec![] },
        material: mat,
        fracture: frac,
        solver: SolverConfig {
            n_increments: 1,
            newton_tol: 1e-8,
            newton_max_iter: 10,
            staggered_passes: 1,
            staggered_tol: 1e-3,
            cutback_factor: 0.5,
            max_cutbacks: 1,
        },
        mesh,
    };
    let (state, _) = run_loadpath(&setup, |_, _| {}).expect("relaxation");

    println!("{:>9} {:>10} {:>10}", "x[mm]", "phi", "exp(-|x|/l)");
    for nd in &setup.mesh.nodes {
        let [x, y] = nd.coords;
        if y.abs() < 1e-12 && (x / (0.5 * frac.ell_f)).fract().abs() < 1e-9 && x >= 0.0 {
            println!(
                "{x:>9.3} {:>10.4} {:>10.4}",
                state.phi[nd.id],
                (-x.abs() / frac.ell_f).exp()
            );
        }
    }

    // Surface energy integral.
    let quad = QuadratureRule::gauss_2x2();
    let mut energy = 0.0;
    for (e, elem) in setup.mesh.elements.iter().enumerate() {
        let coords = setup.mesh.element_coords(e);
        for &(xi, w) in &quad.points {
            let (nsh, _) = shape_q8(xi);
            let (_, det, gd) = jacobian_map_coords(&coords, xi, e).unwrap();
            let mut phi = 0.0;
            let mut grad = [0.0; 2];
            for a in 0..8 {
                let p = state.phi[elem.node_ids[a]];
                phi += nsh[a] * p;
                grad[0] += gd[a][0] * p;
                grad[1] += gd[a][1] * p;
            }
            energy += frac.gc * crack_density(phi, grad, &frac) * det * w;
        }
    }
    println!(
        "\nsurface energy per unit ligament: {:.4} N/mm (Gc = {}, h = ell_f/5)",
        energy / h,
        frac.gc
    );
}
