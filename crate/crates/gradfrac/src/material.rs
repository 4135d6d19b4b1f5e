//! Gauss-point constitutive model: conventional mechanism-based strain
//! gradient (CMSG) viscoplasticity with a Taylor-dislocation flow stress,
//! power-law or linear hardening, the algorithmically consistent tangent,
//! plastic-work bookkeeping and the Amor volumetric-deviatoric split of
//! the elastic energy.
//!
//! The update is strain-driven and homogeneous of degree one in the
//! increment: the viscoplastic law uses the effective strain rate as its
//! reference rate, so load steps play the role of the time axis and no
//! physical time parameter appears.

use serde::Deserialize;
use thiserror::Error;

use crate::tensor::Sym4;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("invalid material parameter: {0}")]
    InvalidParameter(String),
    #[error(
        "local Newton iteration for the plastic increment failed to converge \
         after {iters} iterations (residual {residual:.3e}); cut the increment"
    )]
    LocalNewtonDiverged { iters: usize, residual: f64 },
}

/// Hardening law selection: `sigma_ref * f(eps_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum Hardening {
    /// `sigma_Y (1 + E eps_p / sigma_Y)^N`
    #[serde(rename = "power_law")]
    PowerLaw {
        #[serde(rename = "N")]
        exponent: f64,
    },
    /// `sigma_Y (1 + eps_p E_t / sigma_Y)`
    #[serde(rename = "linear")]
    Linear {
        #[serde(rename = "Et")]
        tangent_modulus: f64,
    },
}

/// Elastic, hardening and Taylor-model constants. Stresses in MPa,
/// lengths in mm.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Young's modulus, MPa.
    #[serde(rename = "E")]
    pub e: f64,
    /// Poisson's ratio.
    pub nu: f64,
    /// Initial yield stress, MPa.
    #[serde(rename = "sigma_Y")]
    pub sigma_y: f64,
    pub hardening: Hardening,
    /// Plastic length scale, mm. Zero recovers conventional von Mises
    /// viscoplasticity.
    #[serde(default)]
    pub ell_p: f64,
    /// Rate sensitivity exponent of the viscoplastic law.
    #[serde(default = "default_m")]
    pub m: f64,
    /// Taylor coefficient.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Taylor factor (3.06 for fcc metals).
    #[serde(rename = "M", default = "default_taylor_factor")]
    pub taylor_factor: f64,
    /// Nye factor (1.9 for fcc polycrystals).
    #[serde(rename = "r_bar", default = "default_nye")]
    pub nye_factor: f64,
    /// Burgers vector magnitude, mm. Diagnostic only: it enters the
    /// dislocation-density outputs but not the stress update, which
    /// consumes `ell_p * eta_p` directly.
    #[serde(rename = "b", default = "default_burgers")]
    pub burgers: f64,
}

fn default_m() -> f64 {
    5.0
}
fn default_alpha() -> f64 {
    0.5
}
fn default_taylor_factor() -> f64 {
    3.06
}
fn default_nye() -> f64 {
    1.9
}
fn default_burgers() -> f64 {
    2.5e-7
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), MaterialError> {
        let err = |m: String| Err(MaterialError::InvalidParameter(m));
        if !(self.e > 0.0) {
            return err(format!("material.E must be positive (MPa), got {}", self.e));
        }
        if !(self.nu > 0.0 && self.nu < 0.5) {
            return err(format!("material.nu must lie in (0, 0.5), got {}", self.nu));
        }
        if !(self.sigma_y > 0.0) {
            return err(format!(
                "material.sigma_Y must be positive (MPa), got {}",
                self.sigma_y
            ));
        }
        match self.hardening {
            Hardening::PowerLaw { exponent } => {
                if !(0.0..1.0).contains(&exponent) {
                    return err(format!("material.hardening.N must lie in [0,1), got {exponent}"));
                }
            }
            Hardening::Linear { tangent_modulus } => {
                if tangent_modulus < 0.0 {
                    return err(format!(
                        "material.hardening.Et must be non-negative (MPa), got {tangent_modulus}"
                    ));
                }
            }
        }
        if self.ell_p < 0.0 {
            return err(format!("material.ell_p must be non-negative (mm), got {}", self.ell_p));
        }
        if self.m < 1.0 {
            return err(format!("material.m must be >= 1, got {}", self.m));
        }
        if self.burgers <= 0.0 {
            return err(format!("material.b must be positive (mm), got {}", self.burgers));
        }
        Ok(())
    }

    pub fn mu(&self) -> f64 {
        self.e / (2.0 * (1.0 + self.nu))
    }

    pub fn lambda(&self) -> f64 {
        self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
    }

    pub fn bulk(&self) -> f64 {
        self.e / (3.0 * (1.0 - 2.0 * self.nu))
    }

    /// Reference stress of the hardening decomposition
    /// `sigma = sigma_ref f(eps_p)`.
    pub fn sigma_ref(&self) -> f64 {
        match self.hardening {
            Hardening::PowerLaw { exponent } => self.sigma_y * (self.e / self.sigma_y).powf(exponent),
            Hardening::Linear { .. } => self.sigma_y,
        }
    }

    /// Dimensionless hardening function `f` and its derivative at `eps_p_eq`.
    pub fn f_and_deriv(&self, eps_p_eq: f64) -> (f64, f64) {
        match self.hardening {
            Hardening::PowerLaw { exponent } => {
                let x = eps_p_eq + self.sigma_y / self.e;
                (x.powf(exponent), exponent * x.powf(exponent - 1.0))
            }
            Hardening::Linear { tangent_modulus } => (
                1.0 + eps_p_eq * tangent_modulus / self.sigma_y,
                tangent_modulus / self.sigma_y,
            ),
        }
    }

    /// Plane-strain elastic stiffness in Voigt-gamma form
    /// `(xx, yy, zz, xy)` x `(xx, yy, zz, gamma_xy)`.
    pub fn elastic_tangent(&self) -> [[f64; 4]; 4] {
        let (k, mu) = (self.bulk(), self.mu());
        let mut c = [[0.0; 4]; 4];
        add_dyad(&mut c, k, &Sym4::iso(1.0), &Sym4::iso(1.0));
        add_dev_term(&mut c, 2.0 * mu);
        c
    }
}

/// Per-quadrature-point history carried between increments.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussPointState {
    /// Undamaged Cauchy stress, MPa.
    pub sigma0: Sym4,
    /// Total strain at the end of the increment.
    pub eps: Sym4,
    /// Plastic strain tensor.
    pub eps_p: Sym4,
    /// Equivalent plastic strain (monotone).
    pub eps_p_eq: f64,
    /// Effective plastic strain gradient, 1/mm (lagged by one increment
    /// inside the stress update).
    pub eta_p: f64,
    /// Accumulated plastic work density, MPa (monotone).
    pub psi_p: f64,
    /// Elastic-tension history field, MPa (monotone).
    pub h_plus: f64,
}

/// Uniaxial hardening curve `sigma_ref f(eps_p)`.
pub fn hardening_curve(eps_p_eq: f64, params: &MaterialParams) -> f64 {
    params.sigma_ref() * params.f_and_deriv(eps_p_eq).0
}

/// Taylor-model tensile flow stress
/// `sigma_ref sqrt(f^2(eps_p) + ell_p eta_p)`.
pub fn taylor_flow_stress(eps_p_eq: f64, eta_p: f64, params: &MaterialParams) -> f64 {
    let (f, _) = params.f_and_deriv(eps_p_eq);
    params.sigma_ref() * (f * f + params.ell_p * eta_p).sqrt()
}

/// Diagnostic SSD and GND densities, 1/mm^2.
pub fn dislocation_densities(
    eps_p_eq: f64,
    eta_p: f64,
    params: &MaterialParams,
) -> Result<(f64, f64), MaterialError> {
    if params.burgers <= 0.0 {
        return Err(MaterialError::InvalidParameter(format!(
            "material.b must be positive (mm), got {}",
            params.burgers
        )));
    }
    let (f, _) = params.f_and_deriv(eps_p_eq);
    let denom = params.taylor_factor * params.alpha * params.mu() * params.burgers;
    let rho_s = (params.sigma_ref() * f / denom).powi(2);
    let rho_g = params.nye_factor * eta_p / params.burgers;
    Ok((rho_s, rho_g))
}

/// `a_ij b_kl` contribution to a Voigt-gamma tangent: rows conjugate to
/// stress, columns conjugate to `(eps_xx, eps_yy, eps_zz, gamma_xy)`.
fn add_dyad(c: &mut [[f64; 4]; 4], scale: f64, a: &Sym4, b: &Sym4) {
    let av = a.to_array();
    let bv = b.to_array();
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] += scale * av[i] * bv[j];
        }
    }
}

/// `scale * dev(d eps)` contribution in Voigt-gamma form.
fn add_dev_term(c: &mut [[f64; 4]; 4], scale: f64) {
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += scale * (if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 });
        }
    }
    c[3][3] += 0.5 * scale;
}

const LOCAL_NEWTON_MAX_ITER: usize = 50;
const LOCAL_NEWTON_RTOL: f64 = 1e-10;

/// CMSG viscoplastic stress update.
///
/// Solves the pseudo-time-discrete flow rule
/// `dp = d_eff * (sigma_e / sigma_flow(eps_p + dp, eta_p_old))^m`
/// with `d_eff = sqrt(2/3 de':de')`, radial flow direction
/// `N = 3/2 s_trial / sigma_e_trial`, and elastic volumetric/deviatoric
/// relations on the remainder. The effective gradient entering the flow
/// stress is the converged value of the previous increment.
///
/// Returns the updated state and the consistent tangent in Voigt-gamma
/// form. Plastic work accumulates as `sigma0 : d eps_p` with the
/// undamaged stress.
pub fn cmsg_stress_update(
    state_old: &GaussPointState,
    eps_new: Sym4,
    eta_p_old: f64,
    params: &MaterialParams,
) -> Result<(GaussPointState, [[f64; 4]; 4]), MaterialError> {
    let mu = params.mu();
    let k = params.bulk();
    let sigma_ref = params.sigma_ref();
    let ell_eta = params.ell_p * eta_p_old;
    let m = params.m;

    let d_eps = eps_new - state_old.eps;
    let de_dev = d_eps.dev();
    let d_eff = d_eps.eq_strain();

    let s_trial = state_old.sigma0.dev() + de_dev * (2.0 * mu);
    let sig_m_new = state_old.sigma0.trace() / 3.0 + k * d_eps.trace();
    let sig_e_trial = s_trial.von_mises();

    let flow_stress = |ep: f64| -> (f64, f64) {
        let (f, fp) = params.f_and_deriv(ep);
        let sf = sigma_ref * (f * f + ell_eta).sqrt();
        let dsf = sigma_ref * sigma_ref * f * fp / sf;
        (sf, dsf)
    };

    let mut state_new = *state_old;
    state_new.eps = eps_new;
    state_new.eta_p = eta_p_old;

    if d_eff < 1e-16 || sig_e_trial < 1e-12 * sigma_ref {
        // Purely volumetric or vanishing increment: elastic.
        state_new.sigma0 = s_trial + Sym4::iso(sig_m_new);
        return Ok((state_new, params.elastic_tangent()));
    }

    // Stress-form scalar residual
    // `G(dp) = sig_e_trial - 3 mu dp - sf(ep+dp) (dp/d_eff)^(1/m)`,
    // equivalent to the flow rule but scaled in stress units so the
    // tolerance stays meaningful even at heavily strained (cracked) Gauss
    // points where `(sig_e/sf)^m` overflows any absolute scale. G is
    // monotone decreasing with G(0) > 0 and a unique root in (0, hi].
    let (sf0, _) = flow_stress(state_old.eps_p_eq);
    let mut hi = sig_e_trial / (3.0 * mu);
    let mut lo = 0.0;
    let mut dp = (d_eff * (sig_e_trial / sf0).powf(m)).min(0.5 * hi).max(1e-300);
    let tol = LOCAL_NEWTON_RTOL * sig_e_trial.max(sf0);
    let mut converged = false;
    let mut last_r = f64::INFINITY;
    for _ in 0..LOCAL_NEWTON_MAX_ITER {
        let x = (dp / d_eff).powf(1.0 / m);
        let (sf, dsf) = flow_stress(state_old.eps_p_eq + dp);
        let g = sig_e_trial - 3.0 * mu * dp - sf * x;
        last_r = g;
        if g.abs() <= tol {
            converged = true;
            break;
        }
        if g > 0.0 {
            lo = dp;
        } else {
            hi = dp;
        }
        if hi - lo <= 1e-15 * hi {
            // Bracket collapsed onto the root to machine precision.
            converged = true;
            break;
        }
        let dg = -3.0 * mu - dsf * x - sf * x / (m * dp);
        let next = dp - g / dg;
        dp = if next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi) // bisection fallback
        };
    }
    if !converged {
        return Err(MaterialError::LocalNewtonDiverged {
            iters: LOCAL_NEWTON_MAX_ITER,
            residual: last_r,
        });
    }
    let dp = dp.max(0.0);

    let normal = s_trial * (1.5 / sig_e_trial);
    let d_eps_p = normal * dp;
    let s_new = s_trial - normal * (2.0 * mu * dp);
    let sig_e_new = sig_e_trial - 3.0 * mu * dp;

    state_new.sigma0 = s_new + Sym4::iso(sig_m_new);
    state_new.eps_p = state_old.eps_p + d_eps_p;
    state_new.eps_p_eq = state_old.eps_p_eq + dp;
    state_new.psi_p = state_old.psi_p + sig_e_new * dp;

    // Consistent tangent by implicit differentiation of the residual.
    let (sf, dsf) = flow_stress(state_new.eps_p_eq);
    let phi = sig_e_new / sf;
    let denom = 1.0 + d_eff * m * phi.powf(m - 1.0) * (3.0 * mu + phi * dsf) / sf;
    // d(dp)/d(eps) = [ (2/3) e'/d_eff phi^m + d_eff m phi^(m-1) 2mu/sf N ] / denom
    let g = (de_dev * ((2.0 / 3.0) * phi.powf(m) / d_eff)
        + normal * (d_eff * m * phi.powf(m - 1.0) * 2.0 * mu / sf))
        * (1.0 / denom);

    let mut c = [[0.0; 4]; 4];
    add_dyad(&mut c, k, &Sym4::iso(1.0), &Sym4::iso(1.0));
    add_dev_term(&mut c, 2.0 * mu * (1.0 - 3.0 * mu * dp / sig_e_trial));
    add_dyad(&mut c, -2.0 * mu, &normal, &g);
    add_dyad(&mut c, 4.0 * mu * mu * dp / sig_e_trial, &normal, &normal);

    Ok((state_new, c))
}

/// Amor volumetric-deviatoric split of the elastic strain energy density.
///
/// `psi_plus = lambda/2 <tr>+^2 + mu e':e'`, `psi_minus = lambda/2 <tr>-^2`,
/// evaluated on the elastic strain.
pub fn elastic_energy_split(eps_e: Sym4, params: &MaterialParams) -> (f64, f64) {
    let lambda = params.lambda();
    let mu = params.mu();
    let tr = eps_e.trace();
    let dev = eps_e.dev();
    let dd = dev.ddot(&dev);
    let plus = 0.5 * lambda * tr.max(0.0).powi(2) + mu * dd;
    let minus = 0.5 * lambda * tr.min(0.0).powi(2);
    (plus, minus)
}

/// Total (unsplit) elastic strain energy density
/// `lambda/2 tr^2 + mu tr(eps^2)`.
pub fn elastic_energy(eps_e: Sym4, params: &MaterialParams) -> f64 {
    let tr = eps_e.trace();
    0.5 * params.lambda() * tr * tr + params.mu() * eps_e.ddot(&eps_e)
}

/// Single-point uniaxial-stress stress-strain path driven through the
/// CMSG update (without gradient feedback, `eta_p = 0` unless set).
///
/// At each axial strain level the lateral strain is iterated so the
/// lateral stresses vanish. Returns `(eps_axial, sigma_axial)` pairs.
pub fn uniaxial_stress_path(
    params: &MaterialParams,
    eta_p: f64,
    eps_max: f64,
    n_steps: usize,
) -> Result<Vec<(f64, f64)>, MaterialError> {
    let mut state = GaussPointState::default();
    let mut lat = 0.0_f64;
    let mut out = vec![(0.0, 0.0)];
    for i in 1..=n_steps {
        let ax = eps_max * i as f64 / n_steps as f64;
        // Newton on the lateral strain so that sigma_yy = sigma_zz = 0.
        let mut new_state = state;
        for _ in 0..60 {
            let eps = Sym4::new(ax, lat, lat, 0.0);
            let (s, c) = cmsg_stress_update(&state, eps, eta_p, params)?;
            new_state = s;
            if s.sigma0.yy.abs() < 1e-9 * params.sigma_y {
                break;
            }
            // d sigma_yy / d lat = C[1][1] + C[1][2]
            let d = c[1][1] + c[1][2];
            lat -= s.sigma0.yy / d;
        }
        state = new_state;
        out.push((ax, state.sigma0.xx));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn base_params() -> MaterialParams {
        MaterialParams {
            e: 200_000.0,
            nu: 0.3,
            sigma_y: 600.0, // sigma_Y/E = 0.003
            hardening: Hardening::PowerLaw { exponent: 0.2 },
            ell_p: 0.0,
            m: 5.0,
            alpha: 0.5,
            taylor_factor: 3.06,
            nye_factor: 1.9,
            burgers: 2.5e-7,
        }
    }

    #[test]
    fn hardening_examples() {
        let p = base_params();
        assert_abs_diff_eq!(hardening_curve(0.0, &p), 600.0, epsilon = 1e-9);
        // sigma_Y/E = 0.003, N = 0.2, eps_p = 0.003 -> sigma_Y * 2^0.2
        assert_abs_diff_eq!(
            hardening_curve(0.003, &p) / p.sigma_y,
            2.0_f64.powf(0.2),
            epsilon = 1e-12
        );
        let lin = MaterialParams {
            sigma_y: 345.0,
            hardening: Hardening::Linear { tangent_modulus: 714.8 },
            e: 71_480.0,
            ..base_params()
        };
        assert_abs_diff_eq!(hardening_curve(0.1, &lin), 345.0 + 71.48, epsilon = 1e-9);
    }

    #[test]
    fn taylor_flow_stress_examples() {
        let mut p = base_params();
        p.ell_p = 5.0;
        // eta = 0 recovers the hardening curve.
        assert_abs_diff_eq!(
            taylor_flow_stress(0.01, 0.0, &p),
            hardening_curve(0.01, &p),
            epsilon = 1e-9
        );
        // eps_p = 0, ell_p * eta = 3 (sigma_Y/sigma_ref)^2 -> 2 sigma_Y.
        let eta = 3.0 * (p.sigma_y / p.sigma_ref()).powi(2) / p.ell_p;
        assert_abs_diff_eq!(taylor_flow_stress(0.0, eta, &p), 2.0 * p.sigma_y, epsilon = 1e-9);
        // Gradient-dominated asymptote.
        let eta_big = 1e9;
        assert_abs_diff_eq!(
            taylor_flow_stress(0.0, eta_big, &p) / (p.sigma_ref() * (p.ell_p * eta_big).sqrt()),
            1.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn dislocation_density_examples() {
        let p = base_params();
        let (_, rho_g0) = dislocation_densities(0.1, 0.0, &p).unwrap();
        assert_eq!(rho_g0, 0.0);
        let (rho_s, rho_g) = dislocation_densities(0.0, p.burgers / p.nye_factor, &p).unwrap();
        assert_abs_diff_eq!(rho_g, 1.0, epsilon = 1e-12);
        let denom = p.taylor_factor * p.alpha * p.mu() * p.burgers;
        assert_abs_diff_eq!(rho_s, (p.sigma_y / denom).powi(2), epsilon = 1e-6);
        let bad = MaterialParams { burgers: -1.0, ..p };
        assert!(dislocation_densities(0.0, 0.0, &bad).is_err());
    }

    #[test]
    fn volumetric_increment_is_elastic() {
        let p = base_params();
        let state = GaussPointState::default();
        let eps = Sym4::iso(1e-3);
        let (s, c) = cmsg_stress_update(&state, eps, 0.0, &p).unwrap();
        assert_eq!(s.eps_p_eq, 0.0);
        assert_abs_diff_eq!(s.sigma0.xx, 3.0 * p.bulk() * 1e-3 / 3.0 * 3.0, epsilon = 1e-9);
        assert_eq!(c, p.elastic_tangent());
    }

    #[test]
    fn discrete_flow_rule_holds_at_convergence() {
        let p = base_params();
        let mut state = GaussPointState::default();
        for i in 1..=10 {
            let eps = Sym4::new(0.004 * i as f64, -0.001 * i as f64, 0.0, 0.0005 * i as f64);
            let d_eff = (eps - state.eps).eq_strain();
            let (s, _) = cmsg_stress_update(&state, eps, 0.0, &p).unwrap();
            let dp = s.eps_p_eq - state.eps_p_eq;
            let sf = taylor_flow_stress(s.eps_p_eq, 0.0, &p);
            let rhs = d_eff * (s.sigma0.von_mises() / sf).powf(p.m);
            assert_abs_diff_eq!(dp, rhs, epsilon = 1e-9 * d_eff.max(1e-12));
            state = s;
        }
    }

    #[test]
    fn equilibrium_flow_bracket_unity() {
        // If the converged effective stress equals the flow stress, the
        // plastic increment equals the effective strain increment.
        let p = base_params();
        let mut state = GaussPointState::default();
        // Drive deep into plastic flow where sigma_e ~ sigma_flow.
        for i in 1..=60 {
            let eps = Sym4::new(0.002 * i as f64, -0.0008 * i as f64, 0.0, 0.0);
            let (s, _) = cmsg_stress_update(&state, eps, 0.0, &p).unwrap();
            state = s;
        }
        let sf = taylor_flow_stress(state.eps_p_eq, 0.0, &p);
        let ratio = state.sigma0.von_mises() / sf;
        assert!((ratio - 1.0).abs() < 0.05, "flow should ride near the flow stress, ratio={ratio}");
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let mut p = base_params();
        p.ell_p = 2.0;
        let mut state = GaussPointState::default();
        // Pre-load plastically.
        let (s, _) = cmsg_stress_update(&state, Sym4::new(0.006, -0.002, 0.0, 0.001), 0.5, &p).unwrap();
        state = s;

        let eps_new = Sym4::new(0.009, -0.003, 0.0, 0.002);
        let (_, c) = cmsg_stress_update(&state, eps_new, 0.5, &p).unwrap();
        let h = 1e-7;
        for j in 0..4 {
            // Perturb in the strain-conjugate basis (gamma for shear).
            let mut dplus = eps_new;
            let mut dminus = eps_new;
            match j {
                0 => {
                    dplus.xx += h;
                    dminus.xx -= h;
                }
                1 => {
                    dplus.yy += h;
                    dminus.yy -= h;
                }
                2 => {
                    dplus.zz += h;
                    dminus.zz -= h;
                }
                _ => {
                    dplus.xy += 0.5 * h;
                    dminus.xy -= 0.5 * h;
                }
            }
            let (sp, _) = cmsg_stress_update(&state, dplus, 0.5, &p).unwrap();
            let (sm, _) = cmsg_stress_update(&state, dminus, 0.5, &p).unwrap();
            let fd: Vec<f64> = sp
                .sigma0
                .to_array()
                .iter()
                .zip(sm.sigma0.to_array())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            for i in 0..4 {
                let scale = p.e;
                assert!(
                    (c[i][j] - fd[i]).abs() / scale < 1e-4,
                    "C[{i}][{j}] = {} vs FD {}",
                    c[i][j],
                    fd[i]
                );
            }
        }
    }

    #[test]
    fn energy_split_examples() {
        let p = base_params();
        let lambda = p.lambda();
        let mu = p.mu();
        // Hydrostatic compression eps = -c I.
        let c = 1e-3;
        let (plus, minus) = elastic_energy_split(Sym4::iso(-c), &p);
        assert_eq!(plus, 0.0);
        assert_abs_diff_eq!(minus, 0.5 * lambda * (3.0 * c).powi(2), epsilon = 1e-12);
        // Pure shear gamma = g: psi+ = mu g^2 / 2.
        let g = 2e-3;
        let (plus, minus) = elastic_energy_split(Sym4::new(0.0, 0.0, 0.0, g / 2.0), &p);
        assert_abs_diff_eq!(plus, 0.5 * mu * g * g, epsilon = 1e-12);
        assert_eq!(minus, 0.0);
        // Completeness: psi+ + psi- = lambda/2 tr^2 + mu e':e'.
        let eps = Sym4::new(1e-3, -2e-4, 3e-4, 5e-4);
        let (plus, minus) = elastic_energy_split(eps, &p);
        let dev = eps.dev();
        let expect = 0.5 * lambda * eps.trace().powi(2) + mu * dev.ddot(&dev);
        assert_abs_diff_eq!(plus + minus, expect, epsilon = 1e-12);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let mut p = base_params();
        p.nu = 0.7;
        assert!(p.validate().is_err());
        let mut p = base_params();
        p.m = 0.5;
        assert!(p.validate().is_err());
        assert!(base_params().validate().is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flow_stress_monotone(
            ep1 in 0.0..0.3f64, ep2 in 0.0..0.3f64,
            eta1 in 0.0..50.0f64, eta2 in 0.0..50.0f64,
        ) {
            let mut p = base_params();
            p.ell_p = 1.0;
            let (elo, ehi) = if ep1 < ep2 { (ep1, ep2) } else { (ep2, ep1) };
            let (glo, ghi) = if eta1 < eta2 { (eta1, eta2) } else { (eta2, eta1) };
            prop_assert!(taylor_flow_stress(ehi, glo, &p) >= taylor_flow_stress(elo, glo, &p) - 1e-9);
            prop_assert!(taylor_flow_stress(elo, ghi, &p) >= taylor_flow_stress(elo, glo, &p) - 1e-9);
        }

        #[test]
        fn random_paths_keep_invariants(
            steps in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), 1..12)
        ) {
            let p = base_params();
            let mut state = GaussPointState::default();
            let mut eps = Sym4::ZERO;
            for (dx, dy, dxy) in steps {
                eps = eps + Sym4::new(dx * 1e-3, dy * 1e-3, 0.0, dxy * 1e-3);
                let (s, _) = cmsg_stress_update(&state, eps, 0.0, &p).unwrap();
                // Plastic incompressibility and monotonicity.
                prop_assert!(s.eps_p.trace().abs() <= 1e-8);
                prop_assert!(s.eps_p_eq >= state.eps_p_eq - 1e-15);
                prop_assert!(s.psi_p >= state.psi_p - 1e-12);
                state = s;
            }
        }
    }
}
