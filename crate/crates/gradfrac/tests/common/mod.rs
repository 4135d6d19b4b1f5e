//! Shared helpers for integration tests: an independent rate-independent
//! radial-return oracle and canonical parameter sets.
//!
//! The oracle deliberately shares no code with the production CMSG
//! update: elastic predictor, yield check, scalar Newton on the plastic
//! multiplier against the hardening curve.

#![allow(dead_code)] // not every test target uses every helper

use gradfrac::material::{Hardening, MaterialParams};
use gradfrac::tensor::Sym4;

pub fn aluminium() -> MaterialParams {
    MaterialParams {
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
    }
}

/// The conventional-limit reference material: sigma_Y / E = 0.003, N = 0.2.
pub fn reference_material() -> MaterialParams {
    MaterialParams {
        e: 200_000.0,
        sigma_y: 600.0,
        ..aluminium()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RrState {
    pub eps_p: Sym4,
    pub eps_p_eq: f64,
}

fn flow_stress(eps_p_eq: f64, mat: &MaterialParams) -> f64 {
    match mat.hardening {
        Hardening::PowerLaw { exponent } => {
            mat.sigma_y * (1.0 + mat.e * eps_p_eq / mat.sigma_y).powf(exponent)
        }
        Hardening::Linear { tangent_modulus } => {
            mat.sigma_y * (1.0 + eps_p_eq * tangent_modulus / mat.sigma_y)
        }
    }
}

/// One rate-independent J2 radial-return step to total strain `eps`.
pub fn rr_update(state: &RrState, eps: Sym4, mat: &MaterialParams) -> (Sym4, RrState) {
    let mu = mat.e / (2.0 * (1.0 + mat.nu));
    let lam = mat.e * mat.nu / ((1.0 + mat.nu) * (1.0 - 2.0 * mat.nu));
    let eps_e = eps - state.eps_p;
    let tr = eps_e.trace();
    let mut sig_tr = eps_e * (2.0 * mu);
    sig_tr.xx += lam * tr;
    sig_tr.yy += lam * tr;
    sig_tr.zz += lam * tr;
    let s = sig_tr.dev();
    let sig_etr = (1.5 * s.ddot(&s)).sqrt();
    if sig_etr <= flow_stress(state.eps_p_eq, mat) {
        return (sig_tr, *state);
    }
    // Newton on g(dp) = sig_etr - 3 mu dp - flow(eps_p_eq + dp) = 0.
    let mut dp = 0.0;
    for _ in 0..100 {
        let g = sig_etr - 3.0 * mu * dp - flow_stress(state.eps_p_eq + dp, mat);
        let h = 1e-9 + dp * 1e-9;
        let gp = (sig_etr - 3.0 * mu * (dp + h) - flow_stress(state.eps_p_eq + dp + h, mat) - g) / h;
        let step = g / gp;
        dp -= step;
        dp = dp.max(0.0);
        if step.abs() < 1e-14 {
            break;
        }
    }
    let n = s * (1.5 / sig_etr);
    let new = RrState {
        eps_p: state.eps_p + n * dp,
        eps_p_eq: state.eps_p_eq + dp,
    };
    let sigma = sig_tr - n * (2.0 * mu * dp);
    (sigma, new)
}

/// Uniaxial-stress path through the radial-return oracle: the lateral
/// strain is iterated at each level until the lateral stress vanishes.
pub fn rr_uniaxial_path(mat: &MaterialParams, eps_max: f64, n_steps: usize) -> Vec<(f64, f64)> {
    let mut state = RrState::default();
    let mut lat = 0.0_f64;
    let mut out = vec![(0.0, 0.0)];
    for i in 1..=n_steps {
        let ax = eps_max * i as f64 / n_steps as f64;
        let mut committed = state;
        let mut sigma = Sym4::ZERO;
        for _ in 0..200 {
            let eps = Sym4::new(ax, lat, lat, 0.0);
            let (s, ns) = rr_update(&state, eps, mat);
            sigma = s;
            committed = ns;
            if s.yy.abs() < 1e-10 * mat.sigma_y {
                break;
            }
            // Secant-style correction with the elastic sensitivity.
            let mu = mat.e / (2.0 * (1.0 + mat.nu));
            let lam = mat.e * mat.nu / ((1.0 + mat.nu) * (1.0 - 2.0 * mat.nu));
            lat -= s.yy / (2.0 * (lam + mu));
        }
        state = committed;
        out.push((ax, sigma.xx));
    }
    out
}

/// Deterministic pseudo-random stream for test inputs.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
