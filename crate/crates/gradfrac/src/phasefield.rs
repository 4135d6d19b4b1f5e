//! AT2 phase-field energetics: quadratic degradation, crack surface
//! density, the elastic-tension history field, and the element residual
//! and stiffness of the damage sub-problem.
//!
//! Fixed constitutive choices: `g(phi) = (1-phi)^2`, `w(phi) = phi^2`,
//! `c_w = 1/2`. The fracture driving force at a Gauss point is
//! `H_plus + psi_p`: the running maximum of the tensile elastic energy
//! plus the (monotone) plastic work density.

use serde::Deserialize;
use thiserror::Error;

use crate::mesh::{jacobian_map_coords, shape_q8, MeshError, QuadratureRule};

#[derive(Debug, Error)]
pub enum PhaseFieldError {
    #[error("invalid fracture parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Phase-field fracture constants.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FractureParams {
    /// Critical energy release rate, MPa·mm (= N/mm).
    #[serde(rename = "Gc")]
    pub gc: f64,
    /// Phase-field length scale, mm.
    pub ell_f: f64,
    /// Residual stiffness keeping the displacement system well conditioned
    /// at phi = 1.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_kappa() -> f64 {
    1e-7
}

impl FractureParams {
    pub fn validate(&self) -> Result<(), PhaseFieldError> {
        if !(self.gc > 0.0) {
            return Err(PhaseFieldError::InvalidParameter(format!(
                "fracture.Gc must be positive (MPa·mm), got {}",
                self.gc
            )));
        }
        if !(self.ell_f > 0.0) {
            return Err(PhaseFieldError::InvalidParameter(format!(
                "fracture.ell_f must be positive (mm), got {}",
                self.ell_f
            )));
        }
        if !(self.kappa > 0.0 && self.kappa < 1e-2) {
            return Err(PhaseFieldError::InvalidParameter(format!(
                "fracture.kappa must lie in (0, 1e-2), got {}",
                self.kappa
            )));
        }
        Ok(())
    }
}

/// Quadratic degradation function and its derivative.
pub fn degradation(phi: f64) -> (f64, f64) {
    ((1.0 - phi) * (1.0 - phi), -2.0 * (1.0 - phi))
}

/// AT2 crack surface density
/// `gamma = phi^2 / (2 ell_f) + (ell_f / 2) |grad phi|^2`, 1/mm.
pub fn crack_density(phi: f64, grad_phi: [f64; 2], params: &FractureParams) -> f64 {
    let g2 = grad_phi[0] * grad_phi[0] + grad_phi[1] * grad_phi[1];
    phi * phi / (2.0 * params.ell_f) + 0.5 * params.ell_f * g2
}

/// History field update: running maximum of the tensile elastic energy.
pub fn update_history(h_old: f64, psi_e_plus: f64) -> f64 {
    h_old.max(psi_e_plus)
}

/// Element residual and stiffness of the phase-field sub-problem.
///
/// `driving[g] = H_plus + psi_p` at Gauss point `g` of the element.
/// The stiffness is exact (the functional is quadratic in phi at fixed
/// driving force) and symmetric positive definite for non-negative
/// driving forces.
pub fn pf_element_system(
    coords: &[[f64; 2]; 8],
    phi_nodal: &[f64; 8],
    driving: &[f64; 4],
    params: &FractureParams,
    elem_id: usize,
) -> Result<([f64; 8], [[f64; 8]; 8]), MeshError> {
    let quad = QuadratureRule::gauss_2x2();
    let mut r = [0.0; 8];
    let mut k = [[0.0; 8]; 8];
    let (gc, lf) = (params.gc, params.ell_f);
    for (g, &(xi, w)) in quad.points.iter().enumerate() {
        let (n, _) = shape_q8(xi);
        let (_, det, gd) = jacobian_map_coords(coords, xi, elem_id)?;
        let dv = det * w;
        let mut phi = 0.0;
        let mut grad = [0.0; 2];
        for a in 0..8 {
            phi += n[a] * phi_nodal[a];
            grad[0] += gd[a][0] * phi_nodal[a];
            grad[1] += gd[a][1] * phi_nodal[a];
        }
        let d = driving[g];
        for a in 0..8 {
            r[a] += dv
                * (-2.0 * (1.0 - phi) * n[a] * d
                    + gc * (phi / lf * n[a] + lf * (gd[a][0] * grad[0] + gd[a][1] * grad[1])));
            for b in 0..8 {
                k[a][b] += dv
                    * ((2.0 * d + gc / lf) * n[a] * n[b]
                        + gc * lf * (gd[a][0] * gd[b][0] + gd[a][1] * gd[b][1]));
            }
        }
    }
    Ok((r, k))
}

/// Closed-form homogeneous 1D response of the AT2 model for a linear
/// elastic bar: `phi = E eps^2 ell_f / (Gc + E eps^2 ell_f)` and the
/// degraded stress `(1-phi)^2 E eps`.
pub fn homogeneous_response(strain: f64, e: f64, params: &FractureParams) -> (f64, f64) {
    let x = e * strain * strain * params.ell_f;
    let phi = x / (params.gc + x);
    let (g, _) = degradation(phi);
    (phi, g * e * strain)
}

/// Material strength of the homogeneous AT2 response,
/// `sigma_hat = sqrt(27 E Gc / (256 ell_f))`.
pub fn strength(params: &FractureParams, e: f64) -> f64 {
    (27.0 * e * params.gc / (256.0 * params.ell_f)).sqrt()
}
