//! Plastic strain gradient recovery: the third-order tensor
//! `eta_ijk = eps_ik,j + eps_jk,i - eps_ij,k` and its effective scalar
//! invariant `eta_p = sqrt(1/4 eta:eta)`.
//!
//! Recovery is strictly element-local: the plastic strain components are
//! extrapolated from the 2x2 Gauss points to the element nodes, then
//! differentiated through the shape functions at each Gauss point. At
//! element boundaries `eta_p` is therefore discontinuous, consistent with
//! the first-order scheme.
//!
//! In plane strain the out-of-plane normal component `eps_p_zz` is stored
//! explicitly in the Voigt vector and varies in-plane; its in-plane
//! derivatives contribute to the invariant. Derivatives with respect to
//! the out-of-plane direction vanish.

use crate::mesh::{extrapolate_gp_to_nodes, jacobian_map_coords, MeshError, QuadratureRule};
use crate::tensor::Sym4;

/// Third-order plastic strain gradient at one Gauss point,
/// `components[i][j][k] = eta_ijk` with i, j, k in {0,1,2}.
#[derive(Debug, Clone, Copy, Default)]
pub struct EtaTensor {
    pub components: [[[f64; 3]; 3]; 3],
}

impl EtaTensor {
    /// Squared full contraction `eta : eta`.
    pub fn sq_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s += self.components[i][j][k] * self.components[i][j][k];
                }
            }
        }
        s
    }
}

/// Effective plastic strain gradient `sqrt(1/4 eta:eta)`.
pub fn effective_gradient(eta: &EtaTensor) -> f64 {
    (0.25 * eta.sq_norm()).sqrt()
}

/// Gradient tensor at each of the four Gauss points of one element, from
/// the plastic strain at those Gauss points.
pub fn plastic_gradient_tensor(
    elem_eps_p_at_gps: &[Sym4; 4],
    coords: &[[f64; 2]; 8],
    elem_id: usize,
) -> Result<[EtaTensor; 4], MeshError> {
    // Extrapolate each stored component to the 8 nodes.
    let mut nodal = [[0.0; 8]; 4]; // component-major: xx, yy, zz, xy
    for c in 0..4 {
        let gp_vals = [
            elem_eps_p_at_gps[0].to_array()[c],
            elem_eps_p_at_gps[1].to_array()[c],
            elem_eps_p_at_gps[2].to_array()[c],
            elem_eps_p_at_gps[3].to_array()[c],
        ];
        nodal[c] = extrapolate_gp_to_nodes(gp_vals);
    }

    let quad = QuadratureRule::gauss_2x2();
    let mut out = [EtaTensor::default(); 4];
    for (g, &(xi, _)) in quad.points.iter().enumerate() {
        let (_, _, gd) = jacobian_map_coords(coords, xi, elem_id)?;
        // d eps_c / d x_k for the four stored components, k in {0,1}.
        let mut d = [[0.0; 2]; 4];
        for c in 0..4 {
            for a in 0..8 {
                d[c][0] += gd[a][0] * nodal[c][a];
                d[c][1] += gd[a][1] * nodal[c][a];
            }
        }
        // eps_ij,k as a function of (i,j,k); out-of-plane derivative zero.
        let deriv = |i: usize, j: usize, k: usize| -> f64 {
            if k == 2 {
                return 0.0;
            }
            match (i, j) {
                (0, 0) => d[0][k],
                (1, 1) => d[1][k],
                (2, 2) => d[2][k],
                (0, 1) | (1, 0) => d[3][k],
                _ => 0.0,
            }
        };
        let mut eta = EtaTensor::default();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    eta.components[i][j][k] = deriv(i, k, j) + deriv(j, k, i) - deriv(i, j, k);
                }
            }
        }
        out[g] = eta;
    }
    Ok(out)
}

/// Effective gradient at the four Gauss points of one element.
pub fn element_effective_gradients(
    elem_eps_p_at_gps: &[Sym4; 4],
    coords: &[[f64; 2]; 8],
    elem_id: usize,
) -> Result<[f64; 4], MeshError> {
    let etas = plastic_gradient_tensor(elem_eps_p_at_gps, coords, elem_id)?;
    Ok([
        effective_gradient(&etas[0]),
        effective_gradient(&etas[1]),
        effective_gradient(&etas[2]),
        effective_gradient(&etas[3]),
    ])
}
