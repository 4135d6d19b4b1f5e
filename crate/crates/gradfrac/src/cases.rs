//! The three benchmark problems: boundary-layer (remote K-field), compact
//! tension and asymmetric double-notch, plus the reference quantities and
//! result extraction shared between them.
//!
//! Geometry conventions:
//! * boundary layer — semicircular upper half-model centred on the crack
//!   tip, crack plane along the negative x-axis; structured square core
//!   with a fine strip, blended by transfinite rings onto the outer
//!   circle where Williams displacements are prescribed.
//! * compact tension — upper half-model rectangle, load line at x = 0,
//!   back face at x = width; pin holes are represented by node sets with
//!   prescribed vertical displacement (horizontal motion blocked).
//! * double notch — full bar meshed by transfinite interpolation between
//!   the two circular notch boundaries.

use serde::Deserialize;
use thiserror::Error;

use crate::material::{GaussPointState, MaterialParams};
use crate::mesh::{
    concat_spacings, spacing_geometric, spacing_uniform, Mesh, MeshBuilder, MeshError,
};
use crate::phasefield::{strength, FractureParams};
use crate::solver::{BcProgram, DirichletBc};

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("invalid case configuration: {0}")]
    Configuration(String),
    #[error(
        "refined-zone element size h = {h} mm violates h <= ell_f/5 = {limit} mm; \
         refine the mesh or increase ell_f"
    )]
    MeshTooCoarse { h: f64, limit: f64 },
    #[error("crack path nodes are not ordered by distance from the tip")]
    UnorderedPath,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

const GEOM_TOL: f64 = 1e-9;

/// Mode I Williams displacement field at `(r, theta)` for stress
/// intensity `k_i` (MPa·√mm): `u_i = (K_I/E)·√r·f_i(theta, nu)`, mm.
pub fn williams_displacement(k_i: f64, r: f64, theta: f64, e: f64, nu: f64) -> (f64, f64) {
    let c = (1.0 + nu) / (2.0 * std::f64::consts::PI).sqrt();
    let a = 3.0 - 4.0 * nu - theta.cos();
    let fx = c * a * (theta / 2.0).cos();
    let fy = c * a * (theta / 2.0).sin();
    let s = k_i / e * r.sqrt();
    (s * fx, s * fy)
}

/// Reference fracture quantities of a material/toughness pair.
#[derive(Debug, Clone, Copy)]
pub struct RefQuantities {
    /// `K0 = sqrt(E Gc / (1 - nu^2))`, MPa·√mm.
    pub k0: f64,
    /// Fracture process zone length `R0 = E Gc / (3 pi (1-nu^2) sigma_Y^2)`, mm.
    pub r0: f64,
    /// Homogeneous AT2 strength, MPa.
    pub sigma_hat: f64,
    /// Strength ratio `sigma_hat / sigma_Y`.
    pub strength_ratio: f64,
}

pub fn reference_quantities(mat: &MaterialParams, frac: &FractureParams) -> RefQuantities {
    let one_m_nu2 = 1.0 - mat.nu * mat.nu;
    let k0 = (mat.e * frac.gc / one_m_nu2).sqrt();
    let r0 = mat.e * frac.gc / (3.0 * std::f64::consts::PI * one_m_nu2 * mat.sigma_y.powi(2));
    let sigma_hat = strength(frac, mat.e);
    RefQuantities {
        k0,
        r0,
        sigma_hat,
        strength_ratio: sigma_hat / mat.sigma_y,
    }
}

/// Ordered nodes along the expected crack path, used to measure Δa.
#[derive(Debug, Clone, Default)]
pub struct CrackPath {
    pub nodes: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    /// Initial crack tip position.
    pub tip: [f64; 2],
}

/// Crack extension: distance from the initial tip to the farthest path
/// node whose phase field reaches `threshold` (0.95 by convention).
pub fn measure_crack_extension(
    phi: &[f64],
    path: &CrackPath,
    threshold: f64,
) -> Result<f64, CaseError> {
    let dist = |p: [f64; 2]| ((p[0] - path.tip[0]).powi(2) + (p[1] - path.tip[1]).powi(2)).sqrt();
    let mut prev = -1.0;
    for &p in &path.coords {
        let d = dist(p);
        if d < prev - GEOM_TOL {
            return Err(CaseError::UnorderedPath);
        }
        prev = d;
    }
    let mut da: f64 = 0.0;
    for (&n, &p) in path.nodes.iter().zip(&path.coords) {
        if phi[n] >= threshold {
            da = da.max(dist(p));
        }
    }
    Ok(da)
}

/// Farthest distance from the origin (crack tip) of any Gauss point whose
/// equivalent plastic strain exceeds `threshold`; 0 if none. Used by the
/// boundary-layer small-scale-yielding check.
pub fn plastic_zone_extent(
    mesh: &Mesh,
    gps: &[[GaussPointState; 4]],
    threshold: f64,
) -> f64 {
    let quad = crate::mesh::QuadratureRule::gauss_2x2();
    let mut extent = 0.0_f64;
    for (e, states) in gps.iter().enumerate() {
        let coords = mesh.element_coords(e);
        for (g, s) in states.iter().enumerate() {
            if s.eps_p_eq > threshold {
                let (n, _) = crate::mesh::shape_q8(quad.points[g].0);
                let (mut x, mut y) = (0.0, 0.0);
                for a in 0..8 {
                    x += n[a] * coords[a][0];
                    y += n[a] * coords[a][1];
                }
                extent = extent.max((x * x + y * y).sqrt());
            }
        }
    }
    extent
}

fn default_coarse_ratio() -> f64 {
    1.3
}
fn default_n_rings() -> usize {
    12
}
fn default_thickness() -> f64 {
    1.0
}

/// Boundary-layer (remote K-field) half model.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryLayerSpec {
    /// Outer radius of the semicircular domain, mm.
    pub outer_radius: f64,
    /// Half-width of the structured square core around the tip, mm.
    pub core_size: f64,
    /// Fine-strip extent ahead of the tip (covers the expected crack
    /// growth), mm.
    pub strip_ahead: f64,
    /// Fine-strip extent behind the tip, mm.
    pub strip_behind: f64,
    /// Fine-strip height, mm.
    pub strip_height: f64,
    /// Refined element size, must satisfy h <= ell_f/5.
    pub h: f64,
    #[serde(default = "default_coarse_ratio")]
    pub coarse_ratio: f64,
    #[serde(default = "default_n_rings")]
    pub n_rings: usize,
    /// Final applied stress intensity factor, MPa·√mm.
    pub k_max: f64,
}

/// Compact-tension upper half model. The load line sits at x = 0, the
/// back face at x = width, the crack plane on y = 0.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompactTensionSpec {
    /// W: load line to back face, mm.
    pub width: f64,
    /// Distance from the load line to the front face, mm.
    pub front_margin: f64,
    pub half_height: f64,
    /// Initial crack length from the load line, mm.
    pub a0: f64,
    /// Pin-hole centre height above the crack plane, mm.
    pub pin_y: f64,
    /// Radius of the node set representing the pin, mm.
    pub pin_radius: f64,
    /// Refined element size in the crack-growth strip.
    pub h: f64,
    /// Fine-strip x-range (absolute coordinates), mm.
    pub strip_start: f64,
    pub strip_end: f64,
    pub strip_height: f64,
    #[serde(default = "default_coarse_ratio")]
    pub coarse_ratio: f64,
    /// Final applied pin displacement, mm.
    pub u_max: f64,
    /// Specimen thickness used to report forces in kN, mm.
    #[serde(default = "default_thickness")]
    pub thickness: f64,
}

/// Asymmetric double-notch plane-strain bar (full model).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleNotchSpec {
    pub width: f64,
    pub height: f64,
    /// Notch radius (both notches), mm.
    pub notch_radius: f64,
    /// Vertical centre-to-centre distance between the notches, mm. The
    /// left notch sits above mid-height, the right below.
    pub notch_offset: f64,
    pub h: f64,
    /// Fine-band extension beyond the notch centres, mm.
    pub band_margin: f64,
    #[serde(default = "default_coarse_ratio")]
    pub coarse_ratio: f64,
    pub u_max: f64,
    #[serde(default = "default_thickness")]
    pub thickness: f64,
}

/// Declarative description of one benchmark problem.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum CaseSpec {
    #[serde(rename = "boundary_layer")]
    BoundaryLayer(BoundaryLayerSpec),
    #[serde(rename = "compact_tension")]
    CompactTension(CompactTensionSpec),
    #[serde(rename = "double_notch")]
    DoubleNotch(DoubleNotchSpec),
}

impl CaseSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            CaseSpec::BoundaryLayer(_) => "boundary_layer",
            CaseSpec::CompactTension(_) => "compact_tension",
            CaseSpec::DoubleNotch(_) => "double_notch",
        }
    }

    /// Refined-zone element size.
    pub fn h(&self) -> f64 {
        match self {
            CaseSpec::BoundaryLayer(s) => s.h,
            CaseSpec::CompactTension(s) => s.h,
            CaseSpec::DoubleNotch(s) => s.h,
        }
    }

    /// Final load parameter (K_I in MPa·√mm or displacement in mm).
    pub fn load_max(&self) -> f64 {
        match self {
            CaseSpec::BoundaryLayer(s) => s.k_max,
            CaseSpec::CompactTension(s) => s.u_max,
            CaseSpec::DoubleNotch(s) => s.u_max,
        }
    }

    /// Load parameter unit for logs and curve headers.
    pub fn load_unit(&self) -> &'static str {
        match self {
            CaseSpec::BoundaryLayer(_) => "MPa*sqrt(mm)",
            _ => "mm",
        }
    }

    pub fn thickness(&self) -> f64 {
        match self {
            CaseSpec::BoundaryLayer(_) => 1.0,
            CaseSpec::CompactTension(s) => s.thickness,
            CaseSpec::DoubleNotch(s) => s.thickness,
        }
    }

    pub fn build(
        &self,
        mat: &MaterialParams,
        frac: &FractureParams,
    ) -> Result<(Mesh, BcProgram, CrackPath), CaseError> {
        let limit = frac.ell_f / 5.0;
        if self.h() > limit * (1.0 + 1e-9) {
            return Err(CaseError::MeshTooCoarse { h: self.h(), limit });
        }
        match self {
            CaseSpec::BoundaryLayer(s) => build_boundary_layer(s, mat),
            CaseSpec::CompactTension(s) => build_compact_tension(s),
            CaseSpec::DoubleNotch(s) => build_double_notch(s),
        }
    }
}

/// Fine strip spacing flanked by geometrically graded segments:
/// `[lo .. fine_lo]` coarsening leftwards, uniform `[fine_lo .. fine_hi]`,
/// `[fine_hi .. hi]` coarsening rightwards.
fn graded_line(lo: f64, fine_lo: f64, fine_hi: f64, hi: f64, h: f64, ratio: f64) -> Vec<f64> {
    let mut parts = Vec::new();
    if fine_lo > lo + GEOM_TOL {
        // Build fine-at-left then mirror so the fine end faces the strip.
        let fwd = spacing_geometric(0.0, fine_lo - lo, h, ratio);
        let mirrored: Vec<f64> = fwd.iter().rev().map(|&t| fine_lo - t).collect();
        parts.push(mirrored);
    }
    parts.push(spacing_uniform(fine_lo, fine_hi, h));
    if hi > fine_hi + GEOM_TOL {
        parts.push(spacing_geometric(fine_hi, hi, h, ratio));
    }
    concat_spacings(&parts)
}

/// Coordinate lookup on a finished mesh with the builder's rounding.
fn on_line_y(mesh: &Mesh, y: f64) -> Vec<usize> {
    mesh.nodes
        .iter()
        .filter(|n| (n.coords[1] - y).abs() < GEOM_TOL)
        .map(|n| n.id)
        .collect()
}

pub fn build_boundary_layer(
    spec: &BoundaryLayerSpec,
    mat: &MaterialParams,
) -> Result<(Mesh, BcProgram, CrackPath), CaseError> {
    let c = spec.core_size;
    let big_r = spec.outer_radius;
    if !(big_r > 2.0 * c && c > spec.strip_ahead.max(spec.strip_behind).max(spec.strip_height)) {
        return Err(CaseError::Configuration(format!(
            "boundary layer requires outer_radius > 2*core_size and core_size larger than the \
             fine strip; got R={big_r}, core={c}"
        )));
    }
    let xs = graded_line(-c, -spec.strip_behind, spec.strip_ahead, c, spec.h, spec.coarse_ratio);
    let ys = graded_line(0.0, 0.0, spec.strip_height, c, spec.h, spec.coarse_ratio);

    let mut b = MeshBuilder::new();
    b.add_grid(&xs, &ys, |x, y| [x, y]);

    // Core boundary walk, counter-clockwise: right edge up, top edge
    // right-to-left, left edge down. Angles map the walk onto [0, pi].
    let mut walk: Vec<[f64; 2]> = Vec::new();
    for &y in &ys {
        walk.push([c, y]);
    }
    for &x in xs.iter().rev().skip(1) {
        walk.push([x, c]);
    }
    for &y in ys.iter().rev().skip(1) {
        walk.push([-c, y]);
    }
    let mut arc = vec![0.0; walk.len()];
    for i in 1..walk.len() {
        let d = ((walk[i][0] - walk[i - 1][0]).powi(2) + (walk[i][1] - walk[i - 1][1]).powi(2))
            .sqrt();
        arc[i] = arc[i - 1] + d;
    }
    let total = *arc.last().unwrap();

    // Geometric blend fractions towards the outer circle.
    let rho = spec.coarse_ratio.max(1.01);
    let n_r = spec.n_rings.max(2);
    let t: Vec<f64> = (0..=n_r)
        .map(|j| (rho.powi(j as i32) - 1.0) / (rho.powi(n_r as i32) - 1.0))
        .collect();
    let pos = |i: usize, j: usize| -> [f64; 2] {
        let theta = std::f64::consts::PI * arc[i] / total;
        let outer = [big_r * theta.cos(), big_r * theta.sin()];
        let p = walk[i];
        [
            p[0] + t[j] * (outer[0] - p[0]),
            p[1] + t[j] * (outer[1] - p[1]),
        ]
    };
    for j in 0..n_r {
        for i in 0..walk.len() - 1 {
            b.add_quad([pos(i, j), pos(i, j + 1), pos(i + 1, j + 1), pos(i + 1, j)]);
        }
    }
    let mesh = b.into_q8();
    mesh.validate()?;

    // Outer-rim selection: radial midside nodes of the last ring sit near
    // R - gap/2, chord midsides essentially on R; split the difference.
    let r_inner = (0..walk.len())
        .map(|i| {
            let p = pos(i, n_r - 1);
            (p[0] * p[0] + p[1] * p[1]).sqrt()
        })
        .fold(0.0_f64, f64::max);
    let r_cut = big_r - 0.25 * (big_r - r_inner);

    let mut dirichlet = Vec::new();
    let mut outer_set = Vec::new();
    for n in &mesh.nodes {
        let [x, y] = n.coords;
        let r = (x * x + y * y).sqrt();
        if r >= r_cut {
            let theta = y.atan2(x);
            let (ux, uy) = williams_displacement(1.0, r, theta, mat.e, mat.nu);
            dirichlet.push(DirichletBc { node: n.id, comp: 0, value_per_load: ux });
            dirichlet.push(DirichletBc { node: n.id, comp: 1, value_per_load: uy });
            outer_set.push(n.id);
        }
    }

    let mut ligament = Vec::new();
    let mut crack_face = Vec::new();
    for id in on_line_y(&mesh, 0.0) {
        if outer_set.contains(&id) {
            continue; // rim nodes already carry the Williams values
        }
        if mesh.nodes[id].coords[0] >= -GEOM_TOL {
            ligament.push(id);
            dirichlet.push(DirichletBc { node: id, comp: 1, value_per_load: 0.0 });
        } else {
            crack_face.push(id);
        }
    }
    // Seed the initial crack: phi = 1 on the crack face including the tip.
    let mut phi_ones = crack_face.clone();
    if let Some(&tip) = ligament
        .iter()
        .find(|&&id| mesh.nodes[id].coords[0].abs() < GEOM_TOL)
    {
        phi_ones.push(tip);
    }

    let mut path: Vec<usize> = ligament
        .iter()
        .copied()
        .filter(|&id| mesh.nodes[id].coords[0] <= spec.strip_ahead + GEOM_TOL)
        .collect();
    path.sort_by(|&a, &bn| {
        mesh.nodes[a].coords[0]
            .partial_cmp(&mesh.nodes[bn].coords[0])
            .unwrap()
    });
    let coords = path.iter().map(|&id| mesh.nodes[id].coords).collect();

    let mut node_sets = mesh.node_sets.clone();
    node_sets.insert("outer".into(), outer_set);
    node_sets.insert("ligament".into(), ligament);
    node_sets.insert("crack_face".into(), crack_face);
    node_sets.insert("path".into(), path.clone());
    let mesh = Mesh { node_sets, ..mesh };

    let bc = BcProgram {
        dirichlet,
        phi_ones,
        load_max: spec.k_max,
        reaction: Vec::new(),
    };
    let crack = CrackPath {
        nodes: path,
        coords,
        tip: [0.0, 0.0],
    };
    Ok((mesh, bc, crack))
}

pub fn build_compact_tension(
    spec: &CompactTensionSpec,
) -> Result<(Mesh, BcProgram, CrackPath), CaseError> {
    if !(spec.a0 > 0.0 && spec.a0 < spec.width)
        || !(spec.strip_start < spec.a0 && spec.a0 < spec.strip_end)
        || spec.pin_y + spec.pin_radius >= spec.half_height
        || spec.pin_radius <= 0.0
    {
        return Err(CaseError::Configuration(format!(
            "compact tension geometry inconsistent: a0={} must lie inside the fine strip \
             [{}, {}] and the pin (y={}, r={}) inside the half-height {}",
            spec.a0, spec.strip_start, spec.strip_end, spec.pin_y, spec.pin_radius,
            spec.half_height
        )));
    }
    let xs = graded_line(
        -spec.front_margin,
        spec.strip_start,
        spec.strip_end,
        spec.width,
        spec.h,
        spec.coarse_ratio,
    );
    let ys = graded_line(0.0, 0.0, spec.strip_height, spec.half_height, spec.h, spec.coarse_ratio);
    let mut b = MeshBuilder::new();
    b.add_grid(&xs, &ys, |x, y| [x, y]);
    let mesh = b.into_q8();
    mesh.validate()?;

    let mut dirichlet = Vec::new();
    let mut pin = Vec::new();
    for n in &mesh.nodes {
        let dx = n.coords[0];
        let dy = n.coords[1] - spec.pin_y;
        if (dx * dx + dy * dy).sqrt() <= spec.pin_radius {
            dirichlet.push(DirichletBc { node: n.id, comp: 0, value_per_load: 0.0 });
            dirichlet.push(DirichletBc { node: n.id, comp: 1, value_per_load: 1.0 });
            pin.push(n.id);
        }
    }
    if pin.is_empty() {
        return Err(CaseError::Configuration(format!(
            "no nodes within pin_radius={} of the pin centre (0, {}); refine the mesh or \
             enlarge the radius",
            spec.pin_radius, spec.pin_y
        )));
    }

    let mut ligament = Vec::new();
    let mut phi_ones = Vec::new();
    for id in on_line_y(&mesh, 0.0) {
        let x = mesh.nodes[id].coords[0];
        if x >= spec.a0 - GEOM_TOL {
            ligament.push(id);
            dirichlet.push(DirichletBc { node: id, comp: 1, value_per_load: 0.0 });
        }
        if x <= spec.a0 + GEOM_TOL {
            phi_ones.push(id);
        }
    }

    let mut path = ligament.clone();
    path.sort_by(|&a, &bn| {
        mesh.nodes[a].coords[0]
            .partial_cmp(&mesh.nodes[bn].coords[0])
            .unwrap()
    });
    let coords: Vec<[f64; 2]> = path.iter().map(|&id| mesh.nodes[id].coords).collect();
    let reaction: Vec<(usize, usize)> = pin.iter().map(|&id| (id, 1)).collect();

    let mut node_sets = mesh.node_sets.clone();
    node_sets.insert("pin".into(), pin);
    node_sets.insert("ligament".into(), ligament);
    node_sets.insert("path".into(), path.clone());
    let mesh = Mesh { node_sets, ..mesh };

    let bc = BcProgram {
        dirichlet,
        phi_ones,
        load_max: spec.u_max,
        reaction,
    };
    let crack = CrackPath {
        nodes: path,
        coords,
        tip: [spec.a0, 0.0],
    };
    Ok((mesh, bc, crack))
}

pub fn build_double_notch(
    spec: &DoubleNotchSpec,
) -> Result<(Mesh, BcProgram, CrackPath), CaseError> {
    let (w, ht, r) = (spec.width, spec.height, spec.notch_radius);
    let y_left = 0.5 * ht + 0.5 * spec.notch_offset;
    let y_right = 0.5 * ht - 0.5 * spec.notch_offset;
    if 2.0 * r >= w || y_left + r >= ht || y_right - r <= 0.0 {
        return Err(CaseError::Configuration(format!(
            "double-notch geometry inconsistent: two radius-{r} notches do not fit a \
             {w} x {ht} bar with offset {}",
            spec.notch_offset
        )));
    }
    let intrusion = |y: f64, yc: f64| -> f64 {
        let d = y - yc;
        if d.abs() < r {
            (r * r - d * d).sqrt()
        } else {
            0.0
        }
    };
    let x_left = |y: f64| intrusion(y, y_left);
    let x_right = |y: f64| w - intrusion(y, y_right);

    let band_lo = (y_right - spec.band_margin).max(r);
    let band_hi = (y_left + spec.band_margin).min(ht - r);
    let ys = graded_line(0.0, band_lo, band_hi, ht, spec.h, spec.coarse_ratio);
    // Uniform transfinite coordinate sized so the widest row inside the
    // fine band still meets the element-size target.
    let max_band_width = ys
        .iter()
        .filter(|&&y| y >= band_lo - GEOM_TOL && y <= band_hi + GEOM_TOL)
        .map(|&y| x_right(y) - x_left(y))
        .fold(0.0_f64, f64::max);
    let n_xi = (max_band_width / spec.h).ceil().max(2.0) as usize;
    let xis: Vec<f64> = (0..=n_xi).map(|i| i as f64 / n_xi as f64).collect();

    let mut b = MeshBuilder::new();
    b.add_grid(&xis, &ys, |xi, y| {
        let (xl, xr) = (x_left(y), x_right(y));
        [xl + xi * (xr - xl), y]
    });
    let mesh = b.into_q8();
    mesh.validate()?;

    let mut dirichlet = Vec::new();
    let bottom = on_line_y(&mesh, 0.0);
    let top = on_line_y(&mesh, ht);
    for &id in &bottom {
        dirichlet.push(DirichletBc { node: id, comp: 1, value_per_load: 0.0 });
    }
    // Pin the bottom-left corner horizontally to remove the rigid mode.
    let corner = bottom
        .iter()
        .copied()
        .min_by(|&a, &bn| {
            mesh.nodes[a].coords[0]
                .partial_cmp(&mesh.nodes[bn].coords[0])
                .unwrap()
        })
        .ok_or_else(|| CaseError::Configuration("empty bottom edge".into()))?;
    dirichlet.push(DirichletBc { node: corner, comp: 0, value_per_load: 0.0 });
    for &id in &top {
        dirichlet.push(DirichletBc { node: id, comp: 1, value_per_load: 1.0 });
    }
    let reaction: Vec<(usize, usize)> = top.iter().map(|&id| (id, 1)).collect();

    let mut node_sets = mesh.node_sets.clone();
    node_sets.insert("bottom".into(), bottom);
    node_sets.insert("top".into(), top);
    let mesh = Mesh { node_sets, ..mesh };

    let bc = BcProgram {
        dirichlet,
        phi_ones: Vec::new(),
        load_max: spec.u_max,
        reaction,
    };
    // Crack nucleates between the notch tips; no predefined path.
    Ok((mesh, bc, CrackPath::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Hardening;
    use approx::assert_abs_diff_eq;

    fn ct_material() -> MaterialParams {
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

    fn ct_fracture() -> FractureParams {
        FractureParams { gc: 9.31, ell_f: 0.15, kappa: 1e-7 }
    }

    #[test]
    fn williams_symmetry_plane_and_back_face() {
        let (_, uy) = williams_displacement(100.0, 2.0, 0.0, 200e3, 0.3);
        assert_abs_diff_eq!(uy, 0.0, epsilon = 1e-15);
        // theta = pi, nu = 0.3: f_y = 3.64 / sqrt(2 pi) ~ 1.4522.
        let k = 50.0;
        let e = 100_000.0;
        let (_, uy) = williams_displacement(k, 1.0, std::f64::consts::PI, e, 0.3);
        assert_abs_diff_eq!(uy / (k / e), 1.4522, epsilon = 1e-4);
        // Linearity in K.
        let (ax, ay) = williams_displacement(30.0, 0.7, 1.1, e, 0.3);
        let (bx, by) = williams_displacement(60.0, 0.7, 1.1, e, 0.3);
        assert_abs_diff_eq!(bx, 2.0 * ax, epsilon = 1e-15);
        assert_abs_diff_eq!(by, 2.0 * ay, epsilon = 1e-15);
    }

    #[test]
    fn reference_quantities_ct_parameters() {
        let q = reference_quantities(&ct_material(), &ct_fracture());
        assert_abs_diff_eq!(q.r0, 0.652, epsilon = 0.002);
        assert_abs_diff_eq!(q.strength_ratio, 1.98, epsilon = 0.01);
        // R0/ell_f = 256/(81 pi (1-nu^2)) * (sigma_hat/sigma_Y)^2.
        let pref = 256.0 / (81.0 * std::f64::consts::PI * 0.91);
        assert_abs_diff_eq!(
            q.r0 / 0.15,
            pref * q.strength_ratio.powi(2),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(pref, 1.105, epsilon = 0.001);
        // Gc -> 0 limits.
        let q0 = reference_quantities(
            &ct_material(),
            &FractureParams { gc: 1e-12, ell_f: 0.15, kappa: 1e-7 },
        );
        assert!(q0.k0 < 1e-3 && q0.r0 < 1e-12);
    }

    #[test]
    fn crack_extension_measurement() {
        let path = CrackPath {
            nodes: vec![0, 1, 2, 3],
            coords: vec![[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [0.3, 0.0]],
            tip: [0.0, 0.0],
        };
        assert_eq!(measure_crack_extension(&[0.2; 4], &path, 0.95).unwrap(), 0.0);
        let phi = [1.0, 1.0, 1.0, 0.5];
        assert_abs_diff_eq!(
            measure_crack_extension(&phi, &path, 0.95).unwrap(),
            0.2,
            epsilon = 1e-12
        );
        let bad = CrackPath {
            nodes: vec![0, 1],
            coords: vec![[0.5, 0.0], [0.1, 0.0]],
            tip: [0.0, 0.0],
        };
        assert!(matches!(
            measure_crack_extension(&[0.0, 0.0], &bad, 0.95),
            Err(CaseError::UnorderedPath)
        ));
    }

    fn small_bl_spec() -> BoundaryLayerSpec {
        BoundaryLayerSpec {
            outer_radius: 20.0,
            core_size: 2.0,
            strip_ahead: 0.8,
            strip_behind: 0.4,
            strip_height: 0.4,
            h: 0.1,
            coarse_ratio: 1.4,
            n_rings: 6,
            k_max: 10.0,
        }
    }

    #[test]
    fn boundary_layer_mesh_and_bcs() {
        let mat = ct_material();
        let frac = FractureParams { gc: 9.31, ell_f: 0.6, kappa: 1e-7 };
        let spec = CaseSpec::BoundaryLayer(small_bl_spec());
        let (mesh, bc, path) = spec.build(&mat, &frac).unwrap();
        assert!(mesh.n_elements() > 100);
        let outer = &mesh.node_sets["outer"];
        assert!(!outer.is_empty());
        // Every outer node carries the Williams pair evaluated at its own
        // position.
        for d in bc.dirichlet.iter().filter(|d| outer.contains(&d.node)) {
            let [x, y] = mesh.nodes[d.node].coords;
            let (ux, uy) = williams_displacement(1.0, (x * x + y * y).sqrt(), y.atan2(x), mat.e, mat.nu);
            let expect = if d.comp == 0 { ux } else { uy };
            assert_abs_diff_eq!(d.value_per_load, expect, epsilon = 1e-14);
        }
        // Ligament nodes are vertically fixed, crack face nodes seeded.
        assert!(!mesh.node_sets["ligament"].is_empty());
        assert!(!bc.phi_ones.is_empty());
        for &id in &bc.phi_ones {
            assert!(mesh.nodes[id].coords[0] <= GEOM_TOL);
            assert!(mesh.nodes[id].coords[1].abs() < GEOM_TOL);
        }
        assert!(path.nodes.len() > 3);
        assert_eq!(path.tip, [0.0, 0.0]);
    }

    #[test]
    fn boundary_layer_rejects_coarse_mesh() {
        let spec = CaseSpec::BoundaryLayer(small_bl_spec());
        let err = spec.build(&ct_material(), &ct_fracture()).unwrap_err();
        assert!(matches!(err, CaseError::MeshTooCoarse { .. }));
    }

    #[test]
    fn compact_tension_mesh_and_bcs() {
        let spec = CompactTensionSpec {
            width: 25.0,
            front_margin: 6.25,
            half_height: 15.0,
            a0: 12.5,
            pin_y: 6.875,
            pin_radius: 1.5,
            h: 0.25,
            strip_start: 11.5,
            strip_end: 16.0,
            strip_height: 0.75,
            coarse_ratio: 1.4,
            u_max: 0.5,
            thickness: 5.0,
        };
        let frac = FractureParams { gc: 9.31, ell_f: 1.3, kappa: 1e-7 };
        let case = CaseSpec::CompactTension(spec);
        let (mesh, bc, path) = case.build(&ct_material(), &frac).unwrap();
        assert!(!mesh.node_sets["pin"].is_empty());
        // Pin nodes: vertical drive, horizontal block.
        for &id in &mesh.node_sets["pin"] {
            assert!(bc
                .dirichlet
                .iter()
                .any(|d| d.node == id && d.comp == 1 && d.value_per_load == 1.0));
            assert!(bc
                .dirichlet
                .iter()
                .any(|d| d.node == id && d.comp == 0 && d.value_per_load == 0.0));
        }
        assert_eq!(path.tip, [12.5, 0.0]);
        // Seeds stop at the tip; the ligament beyond stays unseeded.
        for &id in &bc.phi_ones {
            assert!(mesh.nodes[id].coords[0] <= 12.5 + GEOM_TOL);
        }
        assert!(bc.reaction.iter().all(|&(_, c)| c == 1));
    }

    #[test]
    fn double_notch_mesh_and_bcs() {
        let spec = DoubleNotchSpec {
            width: 10.0,
            height: 20.0,
            notch_radius: 2.5,
            notch_offset: 2.5,
            h: 0.4,
            band_margin: 0.8,
            coarse_ratio: 1.4,
            u_max: 0.2,
            thickness: 1.0,
        };
        let frac = FractureParams { gc: 9.31, ell_f: 2.2, kappa: 1e-7 };
        let case = CaseSpec::DoubleNotch(spec.clone());
        let (mesh, bc, _) = case.build(&ct_material(), &frac).unwrap();
        // The notch arcs are resolved: corner nodes sit on each circle and
        // straight-sided midside nodes cut inside by at most the local
        // chord sagitta, bounded by the element size.
        let r = spec.notch_radius;
        let centers = [[0.0, 11.25], [10.0, 8.75]];
        for c in centers {
            let mut closest = f64::INFINITY;
            for n in &mesh.nodes {
                let d = ((n.coords[0] - c[0]).powi(2) + (n.coords[1] - c[1]).powi(2)).sqrt();
                assert!(d >= r - spec.h, "node {:?} inside notch", n.coords);
                closest = closest.min((d - r).abs());
            }
            assert!(closest < 1e-9, "no node on notch arc (closest {closest})");
        }
        // Top edge drives, bottom edge fixed, exactly one horizontal pin.
        let top = &mesh.node_sets["top"];
        assert!(top
            .iter()
            .all(|&id| bc.dirichlet.iter().any(|d| d.node == id && d.comp == 1)));
        let n_x_pins = bc.dirichlet.iter().filter(|d| d.comp == 0).count();
        assert_eq!(n_x_pins, 1);
        assert_eq!(bc.reaction.len(), top.len());
    }
}
