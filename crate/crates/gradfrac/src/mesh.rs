//! Geometry and discretisation: 8-node serendipity quadrilaterals with
//! 2x2 reduced Gauss integration, shape function evaluation, the
//! isoparametric map, and element-local Gauss-to-node field recovery.
//!
//! Node ordering convention for [`ElementQ8`]: four corner nodes
//! counter-clockwise, then the four midside nodes (bottom, right, top,
//! left). The same ordering is used in the mesh text format and in the
//! VTK output (`VTK_QUADRATIC_QUAD`).
//!
//! # Mesh file grammar
//!
//! Plain text, line oriented, `#` starts a comment. Four sections, each
//! introduced by a keyword on its own line:
//!
//! ```text
//! nodes
//! <id> <x> <y>          # ids dense 0..n-1, coordinates in mm
//! elements
//! <id> <n0> ... <n7>    # corners CCW then midsides
//! nodesets
//! <name> <id> <id> ...  # one set per line
//! elemsets
//! <name> <id> <id> ...
//! ```
//!
//! The `nodesets`/`elemsets` sections are optional.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("element {elem}: non-positive Jacobian determinant {det:.3e} (distorted element)")]
    DistortedElement { elem: usize, det: f64 },
    #[error("element {elem} references invalid node id {node}")]
    InvalidNodeId { elem: usize, node: usize },
    #[error("node set `{set}` references invalid node id {node}")]
    InvalidSetNode { set: String, node: usize },
    #[error("element {elem}: repeated corner node {node}")]
    RepeatedCorner { elem: usize, node: usize },
    #[error("node {node} has non-finite coordinates")]
    NonFiniteCoords { node: usize },
    #[error("mesh file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub id: usize,
    pub coords: [f64; 2],
}

/// 8-node serendipity quadrilateral.
#[derive(Debug, Clone, Copy)]
pub struct ElementQ8 {
    pub node_ids: [usize; 8],
}

#[derive(Debug, Clone, Default)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub elements: Vec<ElementQ8>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
    pub element_sets: BTreeMap<String, Vec<usize>>,
}

/// Quadrature rule on the reference square `[-1,1]^2`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// `(local coords, weight)` pairs.
    pub points: Vec<([f64; 2], f64)>,
    pub order: &'static str,
}

impl QuadratureRule {
    /// The 2x2 reduced-integration rule used for every integral in this
    /// crate (displacement, plastic gradient recovery and phase field
    /// share Gauss points so that per-point state is co-located).
    ///
    /// Point ordering follows the corner ordering: `(-g,-g), (g,-g),
    /// (g,g), (-g,g)` with `g = 1/sqrt(3)`.
    pub fn gauss_2x2() -> Self {
        let g = 1.0 / 3.0_f64.sqrt();
        QuadratureRule {
            points: vec![
                ([-g, -g], 1.0),
                ([g, -g], 1.0),
                ([g, g], 1.0),
                ([-g, g], 1.0),
            ],
            order: "2x2",
        }
    }
}

/// Local coordinates of the 8 nodes of the reference element.
pub const Q8_LOCAL_COORDS: [[f64; 2]; 8] = [
    [-1.0, -1.0],
    [1.0, -1.0],
    [1.0, 1.0],
    [-1.0, 1.0],
    [0.0, -1.0],
    [1.0, 0.0],
    [0.0, 1.0],
    [-1.0, 0.0],
];

/// Serendipity Q8 shape functions and their local derivatives at `xi`.
///
/// Returns `(values, d/d(xi,eta))`. The values form a partition of unity
/// and satisfy the Kronecker-delta property at the 8 nodes.
pub fn shape_q8(xi: [f64; 2]) -> ([f64; 8], [[f64; 2]; 8]) {
    let (s, t) = (xi[0], xi[1]);
    let mut n = [0.0; 8];
    let mut d = [[0.0; 2]; 8];

    // Corner nodes.
    for i in 0..4 {
        let (si, ti) = (Q8_LOCAL_COORDS[i][0], Q8_LOCAL_COORDS[i][1]);
        n[i] = 0.25 * (1.0 + s * si) * (1.0 + t * ti) * (s * si + t * ti - 1.0);
        d[i][0] = 0.25 * si * (1.0 + t * ti) * (2.0 * s * si + t * ti);
        d[i][1] = 0.25 * ti * (1.0 + s * si) * (2.0 * t * ti + s * si);
    }
    // Midside nodes on eta = +-1 edges (local xi_i = 0).
    for &i in &[4usize, 6] {
        let ti = Q8_LOCAL_COORDS[i][1];
        n[i] = 0.5 * (1.0 - s * s) * (1.0 + t * ti);
        d[i][0] = -s * (1.0 + t * ti);
        d[i][1] = 0.5 * ti * (1.0 - s * s);
    }
    // Midside nodes on xi = +-1 edges (local eta_i = 0).
    for &i in &[5usize, 7] {
        let si = Q8_LOCAL_COORDS[i][0];
        n[i] = 0.5 * (1.0 + s * si) * (1.0 - t * t);
        d[i][0] = 0.5 * si * (1.0 - t * t);
        d[i][1] = -t * (1.0 + s * si);
    }
    (n, d)
}

/// Isoparametric map at `xi` for an element given by its 8 nodal
/// coordinates.
///
/// Returns `(J, det J, global derivatives)` with `J[i][j] = d x_j / d xi_i`
/// and `global_derivs[a][k] = d N_a / d x_k`.
pub fn jacobian_map_coords(
    coords: &[[f64; 2]; 8],
    xi: [f64; 2],
    elem_id: usize,
) -> Result<([[f64; 2]; 2], f64, [[f64; 2]; 8]), MeshError> {
    let (_, dloc) = shape_q8(xi);
    let mut j = [[0.0; 2]; 2];
    for a in 0..8 {
        for i in 0..2 {
            for k in 0..2 {
                j[i][k] += dloc[a][i] * coords[a][k];
            }
        }
    }
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if det <= 0.0 || !det.is_finite() {
        return Err(MeshError::DistortedElement { elem: elem_id, det });
    }
    let inv = [
        [j[1][1] / det, -j[0][1] / det],
        [-j[1][0] / det, j[0][0] / det],
    ];
    // dN/dx_k = dN/dxi_i * (J^-1)[i][k] with (J^-1)[i][k] = d xi_i / d x_k
    // laid out so that inv[k][i] multiplies dloc[a][i].
    let mut gd = [[0.0; 2]; 8];
    for a in 0..8 {
        for k in 0..2 {
            gd[a][k] = inv[k][0] * dloc[a][0] + inv[k][1] * dloc[a][1];
        }
    }
    Ok((j, det, gd))
}

/// Convenience wrapper over [`jacobian_map_coords`] for a mesh element.
pub fn jacobian_map(
    elem_idx: usize,
    mesh: &Mesh,
    xi: [f64; 2],
) -> Result<([[f64; 2]; 2], f64, [[f64; 2]; 8]), MeshError> {
    let coords = mesh.element_coords(elem_idx);
    jacobian_map_coords(&coords, xi, elem_idx)
}

/// Plane-strain strain-displacement matrix, Voigt order
/// `(eps_xx, eps_yy, gamma_xy)`, for the nodal dof order
/// `(u0x, u0y, u1x, u1y, ...)`.
pub fn strain_displacement_matrix(global_derivs: &[[f64; 2]; 8]) -> [[f64; 16]; 3] {
    let mut b = [[0.0; 16]; 3];
    for a in 0..8 {
        let (dx, dy) = (global_derivs[a][0], global_derivs[a][1]);
        b[0][2 * a] = dx;
        b[1][2 * a + 1] = dy;
        b[2][2 * a] = dy;
        b[2][2 * a + 1] = dx;
    }
    b
}

/// Extrapolate a scalar known at the four 2x2 Gauss points to the 8 nodes.
///
/// Corner values come from bilinear extrapolation of the Gauss-point grid
/// (scaling factor `sqrt(3)` from Gauss coordinates to the corners);
/// midside values are the averages of the adjacent corners.
pub fn extrapolate_gp_to_nodes(gp_values: [f64; 4]) -> [f64; 8] {
    let s3 = 3.0_f64.sqrt();
    // Gauss points sit at the corner pattern (-g,-g),(g,-g),(g,g),(-g,g).
    let gp_sign = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let mut nodal = [0.0; 8];
    for c in 0..4 {
        let (xc, yc) = (s3 * Q8_LOCAL_COORDS[c][0], s3 * Q8_LOCAL_COORDS[c][1]);
        let mut v = 0.0;
        for g in 0..4 {
            let w = 0.25 * (1.0 + xc * gp_sign[g][0]) * (1.0 + yc * gp_sign[g][1]);
            v += w * gp_values[g];
        }
        nodal[c] = v;
    }
    nodal[4] = 0.5 * (nodal[0] + nodal[1]);
    nodal[5] = 0.5 * (nodal[1] + nodal[2]);
    nodal[6] = 0.5 * (nodal[2] + nodal[3]);
    nodal[7] = 0.5 * (nodal[3] + nodal[0]);
    nodal
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, elem_idx: usize) -> [[f64; 2]; 8] {
        let e = &self.elements[elem_idx];
        let mut c = [[0.0; 2]; 8];
        for (a, &nid) in e.node_ids.iter().enumerate() {
            c[a] = self.nodes[nid].coords;
        }
        c
    }

    /// Structural checks: dense node ids, finite coordinates, valid element
    /// connectivity, distinct corners, valid set members, and a positive
    /// Jacobian at every Gauss point of every element.
    pub fn validate(&self) -> Result<(), MeshError> {
        for (i, n) in self.nodes.iter().enumerate() {
            debug_assert_eq!(n.id, i);
            if !n.coords[0].is_finite() || !n.coords[1].is_finite() {
                return Err(MeshError::NonFiniteCoords { node: i });
            }
        }
        let quad = QuadratureRule::gauss_2x2();
        for (ei, e) in self.elements.iter().enumerate() {
            for &nid in &e.node_ids {
                if nid >= self.nodes.len() {
                    return Err(MeshError::InvalidNodeId { elem: ei, node: nid });
                }
            }
            for a in 0..4 {
                for b in (a + 1)..4 {
                    if e.node_ids[a] == e.node_ids[b] {
                        return Err(MeshError::RepeatedCorner {
                            elem: ei,
                            node: e.node_ids[a],
                        });
                    }
                }
            }
            let coords = self.element_coords(ei);
            for &(xi, _) in &quad.points {
                jacobian_map_coords(&coords, xi, ei)?;
            }
        }
        for (name, set) in &self.node_sets {
            for &nid in set {
                if nid >= self.nodes.len() {
                    return Err(MeshError::InvalidSetNode {
                        set: name.clone(),
                        node: nid,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# gradfrac mesh\nnodes\n");
        for n in &self.nodes {
            let _ = writeln!(s, "{} {:.17e} {:.17e}", n.id, n.coords[0], n.coords[1]);
        }
        s.push_str("elements\n");
        for (i, e) in self.elements.iter().enumerate() {
            let ids: Vec<String> = e.node_ids.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{} {}", i, ids.join(" "));
        }
        if !self.node_sets.is_empty() {
            s.push_str("nodesets\n");
            for (name, set) in &self.node_sets {
                let ids: Vec<String> = set.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{} {}", name, ids.join(" "));
            }
        }
        if !self.element_sets.is_empty() {
            s.push_str("elemsets\n");
            for (name, set) in &self.element_sets {
                let ids: Vec<String> = set.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{} {}", name, ids.join(" "));
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh, MeshError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Nodes,
            Elements,
            NodeSets,
            ElemSets,
        }
        let mut mesh = Mesh::default();
        let mut section = Section::None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "nodes" => {
                    section = Section::Nodes;
                    continue;
                }
                "elements" => {
                    section = Section::Elements;
                    continue;
                }
                "nodesets" => {
                    section = Section::NodeSets;
                    continue;
                }
                "elemsets" => {
                    section = Section::ElemSets;
                    continue;
                }
                _ => {}
            }
            let err = |msg: String| MeshError::Parse {
                line: lineno + 1,
                msg,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match section {
                Section::None => {
                    return Err(err(format!("unexpected content before a section keyword: `{line}`")))
                }
                Section::Nodes => {
                    if toks.len() != 3 {
                        return Err(err("expected `id x y`".into()));
                    }
                    let id: usize = toks[0].parse().map_err(|e| err(format!("bad node id: {e}")))?;
                    if id != mesh.nodes.len() {
                        return Err(err(format!("node ids must be dense, expected {}", mesh.nodes.len())));
                    }
                    let x: f64 = toks[1].parse().map_err(|e| err(format!("bad x: {e}")))?;
                    let y: f64 = toks[2].parse().map_err(|e| err(format!("bad y: {e}")))?;
                    mesh.nodes.push(Node { id, coords: [x, y] });
                }
                Section::Elements => {
                    if toks.len() != 9 {
                        return Err(err("expected `id n0 .. n7`".into()));
                    }
                    let mut ids = [0usize; 8];
                    for (k, t) in toks[1..].iter().enumerate() {
                        ids[k] = t.parse().map_err(|e| err(format!("bad node id: {e}")))?;
                    }
                    mesh.elements.push(ElementQ8 { node_ids: ids });
                }
                Section::NodeSets | Section::ElemSets => {
                    let name = toks[0].to_string();
                    let mut ids = Vec::with_capacity(toks.len() - 1);
                    for t in &toks[1..] {
                        ids.push(t.parse().map_err(|e| err(format!("bad id in set `{name}`: {e}")))?);
                    }
                    if section == Section::NodeSets {
                        mesh.node_sets.insert(name, ids);
                    } else {
                        mesh.element_sets.insert(name, ids);
                    }
                }
            }
        }
        Ok(mesh)
    }
}

// ---------------------------------------------------------------------------
// Structured mesh construction (used by the case builders).
// ---------------------------------------------------------------------------

/// Incremental builder producing Q8 meshes from linear quads.
///
/// Corner nodes are deduplicated on (rounded) coordinates so adjacent
/// blocks stitch automatically; midside nodes are inserted per shared edge
/// when converting to Q8.
pub struct MeshBuilder {
    nodes: Vec<[f64; 2]>,
    lookup: std::collections::HashMap<(i64, i64), usize>,
    quads: Vec<[usize; 4]>,
    scale: f64,
}

impl Default for MeshBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl MeshBuilder {
    pub fn new() -> Self {
        MeshBuilder {
            nodes: Vec::new(),
            lookup: std::collections::HashMap::new(),
            quads: Vec::new(),
            scale: 1e9,
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] * self.scale).round() as i64, (p[1] * self.scale).round() as i64)
    }

    pub fn add_node(&mut self, p: [f64; 2]) -> usize {
        let k = self.key(p);
        if let Some(&id) = self.lookup.get(&k) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(p);
        self.lookup.insert(k, id);
        id
    }

    /// Add a 4-node quad, corners counter-clockwise.
    pub fn add_quad(&mut self, corners: [[f64; 2]; 4]) {
        let ids = [
            self.add_node(corners[0]),
            self.add_node(corners[1]),
            self.add_node(corners[2]),
            self.add_node(corners[3]),
        ];
        self.quads.push(ids);
    }

    /// Tensor-product block from coordinate arrays, optionally warped by a
    /// mapping applied to each grid point.
    pub fn add_grid<F>(&mut self, xs: &[f64], ys: &[f64], map: F)
    where
        F: Fn(f64, f64) -> [f64; 2],
    {
        for j in 0..ys.len() - 1 {
            for i in 0..xs.len() - 1 {
                self.add_quad([
                    map(xs[i], ys[j]),
                    map(xs[i + 1], ys[j]),
                    map(xs[i + 1], ys[j + 1]),
                    map(xs[i], ys[j + 1]),
                ]);
            }
        }
    }

    /// Convert to a Q8 mesh, inserting one midside node per unique edge at
    /// the edge midpoint.
    pub fn into_q8(self) -> Mesh {
        let mut nodes: Vec<Node> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, &coords)| Node { id, coords })
            .collect();
        let mut edge_mid: std::collections::HashMap<(usize, usize), usize> =
            std::collections::HashMap::new();
        let mut elements = Vec::with_capacity(self.quads.len());
        for q in &self.quads {
            let mut ids = [0usize; 8];
            ids[..4].copy_from_slice(q);
            for k in 0..4 {
                let (a, b) = (q[k], q[(k + 1) % 4]);
                let key = (a.min(b), a.max(b));
                let mid = *edge_mid.entry(key).or_insert_with(|| {
                    let id = nodes.len();
                    let pa = nodes[a].coords;
                    let pb = nodes[b].coords;
                    nodes.push(Node {
                        id,
                        coords: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                    });
                    id
                });
                ids[4 + k] = mid;
            }
            elements.push(ElementQ8 { node_ids: ids });
        }
        Mesh {
            nodes,
            elements,
            node_sets: BTreeMap::new(),
            element_sets: BTreeMap::new(),
        }
    }
}

/// 1D point distribution from `a` to `b`: uniform spacing `h`.
/// The last interval is stretched/shrunk so the endpoint is exact.
pub fn spacing_uniform(a: f64, b: f64, h: f64) -> Vec<f64> {
    let n = ((b - a).abs() / h).round().max(1.0) as usize;
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// 1D point distribution from `a` to `b` with the first interval `h0`
/// growing geometrically by `ratio` (> 1). The growth factor is adjusted
/// slightly so the endpoint is hit exactly.
pub fn spacing_geometric(a: f64, b: f64, h0: f64, ratio: f64) -> Vec<f64> {
    let len = (b - a).abs();
    if len <= h0 * 1.5 {
        return vec![a, b];
    }
    // Number of intervals for the requested ratio.
    let n = if (ratio - 1.0).abs() < 1e-12 {
        (len / h0).ceil() as usize
    } else {
        ((1.0 + len / h0 * (ratio - 1.0)).ln() / ratio.ln()).ceil() as usize
    }
    .max(1);
    // Solve for the ratio r that makes n intervals starting at h0 span len.
    let mut r = ratio;
    for _ in 0..60 {
        let f = if (r - 1.0).abs() < 1e-14 {
            h0 * n as f64 - len
        } else {
            h0 * (r.powi(n as i32) - 1.0) / (r - 1.0) - len
        };
        let df = if (r - 1.0).abs() < 1e-14 {
            h0 * (n * (n - 1)) as f64 / 2.0
        } else {
            h0 * ((n as f64 * r.powi(n as i32 - 1)) * (r - 1.0) - (r.powi(n as i32) - 1.0))
                / (r - 1.0).powi(2)
        };
        let step = f / df;
        r -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    let dir = (b - a).signum();
    let mut pts = vec![a];
    let mut h = h0;
    let mut x = a;
    for _ in 0..n {
        x += dir * h;
        pts.push(x);
        h *= r;
    }
    *pts.last_mut().unwrap() = b;
    pts
}

/// Concatenate point arrays sharing endpoints.
pub fn concat_spacings(parts: &[Vec<f64>]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in parts {
        if out.is_empty() {
            out.extend_from_slice(p);
        } else {
            debug_assert!((out.last().unwrap() - p[0]).abs() < 1e-9);
            out.extend_from_slice(&p[1..]);
        }
    }
    out
}
