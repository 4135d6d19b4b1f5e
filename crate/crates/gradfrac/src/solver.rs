//! Global assembly and the staggered incremental solution of the coupled
//! displacement / phase-field problem.
//!
//! Each increment advances the load parameter, runs a Newton loop on the
//! displacement field with the phase field frozen (the constitutive update
//! uses the effective plastic strain gradient lagged by one increment),
//! recovers the gradient field from the converged plastic strain, updates
//! the history field and finally solves the phase-field system, which is
//! linear at fixed driving force. Diverged increments are retried with a
//! reduced load step.
//!
//! The displacement tangent of the viscoplastic update is nonsymmetric,
//! so the u-system is factorized with a sparse LU; the phase-field system
//! is symmetric positive definite and uses a sparse Cholesky. Symbolic
//! factorizations are computed once per sparsity pattern and reused.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu, SymbolicLlt, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::gradient::element_effective_gradients;
use crate::material::{
    cmsg_stress_update, elastic_energy_split, GaussPointState, MaterialError, MaterialParams,
};
use crate::mesh::{
    jacobian_map_coords, shape_q8, strain_displacement_matrix, Mesh, MeshError, QuadratureRule,
};
use crate::phasefield::{degradation, pf_element_system, update_history, FractureParams, PhaseFieldError};
use crate::tensor::Sym4;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    PhaseField(#[from] PhaseFieldError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "sparse factorization failed: {0}; the system may be singular — check that \
         boundary conditions constrain all rigid-body modes"
    )]
    Factorization(String),
    #[error("linear solve residual {residual:.3e} exceeds the 1e-10 contract")]
    ResidualCheck { residual: f64 },
    #[error(
        "Newton iteration diverged at step {step} (residual {residual:.3e} \
         after {iters} iterations)"
    )]
    NewtonDiverged { step: usize, iters: usize, residual: f64 },
    #[error("increment {step} failed after {cutbacks} load cutbacks; aborting")]
    IncrementFailed { step: usize, cutbacks: usize },
}

/// Load stepping and convergence controls.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n_increments: usize,
    /// Relative residual tolerance of the displacement Newton loop.
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    /// Staggered passes per increment; 1 reproduces the single-pass
    /// scheme, larger values iterate u and phi to a fixed point.
    #[serde(default = "default_staggered_passes")]
    pub staggered_passes: usize,
    /// Early exit for multi-pass staggering: stop when the max nodal
    /// phase-field change over a pass falls below this.
    #[serde(default = "default_staggered_tol")]
    pub staggered_tol: f64,
    #[serde(default = "default_cutback_factor")]
    pub cutback_factor: f64,
    #[serde(default = "default_max_cutbacks")]
    pub max_cutbacks: usize,
}

fn default_newton_tol() -> f64 {
    1e-6
}
fn default_newton_max_iter() -> usize {
    25
}
fn default_staggered_passes() -> usize {
    1
}
fn default_staggered_tol() -> f64 {
    1e-3
}
fn default_cutback_factor() -> f64 {
    0.5
}
fn default_max_cutbacks() -> usize {
    8
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let err = |m: String| Err(SolverError::InvalidConfig(m));
        if self.n_increments < 1 {
            return err(format!("solver.n_increments must be >= 1, got {}", self.n_increments));
        }
        if !(self.newton_tol > 0.0) {
            return err(format!("solver.newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.newton_max_iter < 1 {
            return err(format!(
                "solver.newton_max_iter must be >= 1, got {}",
                self.newton_max_iter
            ));
        }
        if self.staggered_passes < 1 {
            return err(format!(
                "solver.staggered_passes must be >= 1, got {}",
                self.staggered_passes
            ));
        }
        if !(self.staggered_tol > 0.0) {
            return err(format!(
                "solver.staggered_tol must be positive, got {}",
                self.staggered_tol
            ));
        }
        if !(self.cutback_factor > 0.0 && self.cutback_factor < 1.0) {
            return err(format!(
                "solver.cutback_factor must lie in (0,1), got {}",
                self.cutback_factor
            ));
        }
        Ok(())
    }
}

/// One prescribed displacement component. The applied value is
/// `value_per_load * load_parameter`, so fixed (zero) constraints use
/// `value_per_load = 0`.
#[derive(Debug, Clone, Copy)]
pub struct DirichletBc {
    pub node: usize,
    /// 0 = x, 1 = y.
    pub comp: usize,
    pub value_per_load: f64,
}

/// Boundary conditions and load schedule of a case.
#[derive(Debug, Clone, Default)]
pub struct BcProgram {
    pub dirichlet: Vec<DirichletBc>,
    /// Nodes pinned at phi = 1 (initial crack seed).
    pub phi_ones: Vec<usize>,
    /// Final value of the load parameter (K_I or applied displacement).
    pub load_max: f64,
    /// `(node, comp)` pairs whose internal forces sum to the reported
    /// reaction.
    pub reaction: Vec<(usize, usize)>,
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone)]
pub struct CaseSetup {
    pub mesh: Mesh,
    pub bc: BcProgram,
    pub material: MaterialParams,
    pub fracture: FractureParams,
    pub solver: SolverConfig,
}

/// Free/constrained partition of the displacement dofs. Dof `2*node+comp`.
#[derive(Debug, Clone)]
pub struct DofMap {
    /// Free-dof index per global dof, `None` if constrained.
    pub free: Vec<Option<usize>>,
    pub n_free: usize,
    /// `(global dof, value_per_load)` for each constrained dof.
    pub constrained: Vec<(usize, f64)>,
}

impl DofMap {
    pub fn build(n_nodes: usize, dirichlet: &[DirichletBc]) -> Result<DofMap, SolverError> {
        let mut fixed: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for bc in dirichlet {
            if bc.node >= n_nodes || bc.comp > 1 {
                return Err(SolverError::InvalidConfig(format!(
                    "Dirichlet constraint references node {} comp {} outside the mesh",
                    bc.node, bc.comp
                )));
            }
            let dof = 2 * bc.node + bc.comp;
            if let Some(&v) = fixed.get(&dof) {
                if (v - bc.value_per_load).abs() > 1e-14 * v.abs().max(1.0) {
                    return Err(SolverError::InvalidConfig(format!(
                        "conflicting Dirichlet values on node {} comp {}",
                        bc.node, bc.comp
                    )));
                }
            } else {
                fixed.insert(dof, bc.value_per_load);
            }
        }
        let mut free = vec![None; 2 * n_nodes];
        let mut n_free = 0;
        for (dof, slot) in free.iter_mut().enumerate() {
            if !fixed.contains_key(&dof) {
                *slot = Some(n_free);
                n_free += 1;
            }
        }
        Ok(DofMap {
            free,
            n_free,
            constrained: fixed.into_iter().collect(),
        })
    }
}

/// Sparse system in triplet form; duplicate entries accumulate.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub n: usize,
    pub triplets: Vec<Triplet<usize, usize, f64>>,
    /// Symmetric systems use a Cholesky factorization, others LU.
    pub symmetric: bool,
}

/// Direct sparse solver with a cached symbolic factorization (the
/// sparsity pattern of each field's system is fixed across iterations).
#[derive(Default)]
pub struct DirectSolver {
    lu: Option<SymbolicLu<usize>>,
    llt: Option<SymbolicLlt<usize>>,
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, sys: &GlobalSystem, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        assert_eq!(rhs.len(), sys.n);
        if sys.n == 0 {
            return Ok(Vec::new());
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(sys.n, sys.n, &sys.triplets)
            .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
        let mut x = Mat::<f64>::from_fn(sys.n, 1, |i, _| rhs[i]);
        let mut fact_llt = None;
        let mut fact_lu = None;
        if sys.symmetric {
            if self.llt.is_none() {
                self.llt = Some(
                    SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
                        .map_err(|e| SolverError::Factorization(format!("{e:?}")))?,
                );
            }
            let fact = Llt::try_new_with_symbolic(
                self.llt.clone().unwrap(),
                mat.as_ref(),
                Side::Lower,
            )
            .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
            fact.solve_in_place(x.as_mut());
            fact_llt = Some(fact);
        } else {
            if self.lu.is_none() {
                self.lu = Some(
                    SymbolicLu::try_new(mat.symbolic())
                        .map_err(|e| SolverError::Factorization(format!("{e:?}")))?,
                );
            }
            let fact = Lu::try_new_with_symbolic(self.lu.clone().unwrap(), mat.as_ref())
                .map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
            fact.solve_in_place(x.as_mut());
            fact_lu = Some(fact);
        }
        // Residual contract: backward error
        // ||Kx - r|| <= 1e-10 (||r|| + ||K||_F ||x||), restored by
        // iterative refinement when conditioning degrades it. (A purely
        // rhs-relative bound is unattainable in double precision once
        // cracked elements push cond(K) towards 1/kappa.)
        let bn: f64 = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let kn: f64 = sys.triplets.iter().map(|t| t.val * t.val).sum::<f64>().sqrt();
        let residual = |x: &Mat<f64>| -> (Vec<f64>, f64, f64) {
            let mut res = rhs.to_vec();
            for t in &sys.triplets {
                res[t.row] -= t.val * x[(t.col, 0)];
            }
            let rn = res.iter().map(|v| v * v).sum::<f64>().sqrt();
            let xn = (0..sys.n).map(|i| x[(i, 0)] * x[(i, 0)]).sum::<f64>().sqrt();
            (res, rn, bn + kn * xn)
        };
        let (mut res, mut rn, mut denom) = residual(&x);
        for _ in 0..3 {
            if !(denom > 0.0) || rn <= 1e-10 * denom {
                break;
            }
            let mut dx = Mat::<f64>::from_fn(sys.n, 1, |i, _| res[i]);
            match (&fact_llt, &fact_lu) {
                (Some(f), _) => f.solve_in_place(dx.as_mut()),
                (_, Some(f)) => f.solve_in_place(dx.as_mut()),
                _ => unreachable!(),
            }
            for i in 0..sys.n {
                x[(i, 0)] += dx[(i, 0)];
            }
            (res, rn, denom) = residual(&x);
        }
        if denom > 0.0 && rn > 1e-10 * denom {
            return Err(SolverError::ResidualCheck { residual: rn / denom });
        }
        Ok((0..sys.n).map(|i| x[(i, 0)]).collect())
    }
}

/// One-shot direct solve (no symbolic reuse).
pub fn solve_linear(sys: &GlobalSystem, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    DirectSolver::new().solve(sys, rhs)
}

/// Current unknown fields and committed Gauss-point history.
#[derive(Debug, Clone)]
pub struct SolutionState {
    /// Displacements, dof `2*node+comp`, mm.
    pub u: Vec<f64>,
    /// Nodal phase field.
    pub phi: Vec<f64>,
    /// Converged Gauss-point states per element.
    pub gps: Vec<[GaussPointState; 4]>,
    /// Load parameter of the last converged increment.
    pub load: f64,
}

impl SolutionState {
    pub fn new(mesh: &Mesh, bc: &BcProgram) -> SolutionState {
        let mut phi = vec![0.0; mesh.n_nodes()];
        for &n in &bc.phi_ones {
            phi[n] = 1.0;
        }
        SolutionState {
            u: vec![0.0; 2 * mesh.n_nodes()],
            phi,
            gps: vec![[GaussPointState::default(); 4]; mesh.n_elements()],
            load: 0.0,
        }
    }
}

/// Result of one displacement assembly pass.
pub struct UAssembly {
    pub system: GlobalSystem,
    /// Residual (internal force) at the free dofs; external loads are
    /// applied exclusively through Dirichlet lifting, so r = f_int.
    pub residual: Vec<f64>,
    /// Internal force at every dof, for reaction recovery.
    pub f_int: Vec<f64>,
    /// Trial Gauss-point states consistent with `u`.
    pub trial: Vec<[GaussPointState; 4]>,
}

/// Assemble the degraded displacement system at the current displacement
/// and phase field. Runs the constitutive update at every Gauss point with
/// the effective gradient lagged from the committed states.
pub fn assemble_displacement(
    mesh: &Mesh,
    states_old: &[[GaussPointState; 4]],
    u: &[f64],
    phi: &[f64],
    dofs: &DofMap,
    mat: &MaterialParams,
    frac: &FractureParams,
) -> Result<UAssembly, SolverError> {
    let quad = QuadratureRule::gauss_2x2();
    let shapes: Vec<([f64; 8], [[f64; 2]; 8])> =
        quad.points.iter().map(|&(xi, _)| shape_q8(xi)).collect();
    let weights: Vec<f64> = quad.points.iter().map(|&(xi, w)| {
        let _ = xi;
        w
    }).collect();

    struct ElemOut {
        k: [[f64; 16]; 16],
        f: [f64; 16],
        trial: [GaussPointState; 4],
    }

    let per_elem: Vec<ElemOut> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| -> Result<ElemOut, SolverError> {
            let coords = mesh.element_coords(e);
            let conn = mesh.elements[e].node_ids;
            let mut u_e = [0.0; 16];
            let mut phi_e = [0.0; 8];
            for a in 0..8 {
                u_e[2 * a] = u[2 * conn[a]];
                u_e[2 * a + 1] = u[2 * conn[a] + 1];
                phi_e[a] = phi[conn[a]];
            }
            let mut out = ElemOut {
                k: [[0.0; 16]; 16],
                f: [0.0; 16],
                trial: [GaussPointState::default(); 4],
            };
            for g in 0..4 {
                let (n, _) = shapes[g];
                let (_, det, gd) = jacobian_map_coords(&coords, quad.points[g].0, e)?;
                let b = strain_displacement_matrix(&gd);
                let dv = det * weights[g];
                let mut ev = [0.0; 3]; // eps_xx, eps_yy, gamma_xy
                for (row, evi) in ev.iter_mut().enumerate() {
                    for c in 0..16 {
                        *evi += b[row][c] * u_e[c];
                    }
                }
                let eps = Sym4::new(ev[0], ev[1], 0.0, 0.5 * ev[2]);
                let old = &states_old[e][g];
                let (state_new, c4) = cmsg_stress_update(old, eps, old.eta_p, mat)?;
                out.trial[g] = state_new;

                let mut phi_g = 0.0;
                for a in 0..8 {
                    phi_g += n[a] * phi_e[a];
                }
                let (gphi, _) = degradation(phi_g.clamp(0.0, 1.0));
                let gk = gphi + frac.kappa;

                let s = state_new.sigma0;
                let sv = [gk * s.xx, gk * s.yy, gk * s.xy];
                // In-plane 3x3 tangent in Voigt-gamma order (xx, yy, gamma).
                let idx = [0usize, 1, 3];
                let mut d3 = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        d3[i][j] = gk * c4[idx[i]][idx[j]];
                    }
                }
                for a in 0..16 {
                    for row in 0..3 {
                        out.f[a] += b[row][a] * sv[row] * dv;
                    }
                    for bb in 0..16 {
                        let mut kv = 0.0;
                        for i in 0..3 {
                            for j in 0..3 {
                                kv += b[i][a] * d3[i][j] * b[j][bb];
                            }
                        }
                        out.k[a][bb] += kv * dv;
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut f_int = vec![0.0; 2 * mesh.n_nodes()];
    let mut triplets = Vec::new();
    for (e, out) in per_elem.iter().enumerate() {
        let conn = mesh.elements[e].node_ids;
        let gdof = |a: usize| [2 * conn[a / 2] + a % 2];
        for a in 0..16 {
            let ga = gdof(a)[0];
            f_int[ga] += out.f[a];
            if let Some(ra) = dofs.free[ga] {
                for bb in 0..16 {
                    let gb = gdof(bb)[0];
                    if let Some(cb) = dofs.free[gb] {
                        triplets.push(Triplet {
                            row: ra,
                            col: cb,
                            val: out.k[a][bb],
                        });
                    }
                }
            }
        }
    }
    let mut residual = vec![0.0; dofs.n_free];
    for (dof, slot) in dofs.free.iter().enumerate() {
        if let Some(i) = slot {
            residual[*i] = f_int[dof];
        }
    }
    Ok(UAssembly {
        system: GlobalSystem {
            n: dofs.n_free,
            triplets,
            symmetric: false,
        },
        residual,
        f_int,
        trial: per_elem.into_iter().map(|o| o.trial).collect(),
    })
}

/// Assemble the phase-field system (residual and exact stiffness) at the
/// current nodal phase field, with driving force `H_plus + psi_p` taken
/// from the supplied Gauss-point states. Seed nodes are eliminated.
pub fn assemble_phase(
    mesh: &Mesh,
    states: &[[GaussPointState; 4]],
    phi: &[f64],
    phi_free: &[Option<usize>],
    n_phi_free: usize,
    frac: &FractureParams,
) -> Result<(GlobalSystem, Vec<f64>), SolverError> {
    struct ElemOut {
        r: [f64; 8],
        k: [[f64; 8]; 8],
    }
    let per_elem: Vec<ElemOut> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| -> Result<ElemOut, SolverError> {
            let coords = mesh.element_coords(e);
            let conn = mesh.elements[e].node_ids;
            let mut phi_e = [0.0; 8];
            for a in 0..8 {
                phi_e[a] = phi[conn[a]];
            }
            let mut driving = [0.0; 4];
            for g in 0..4 {
                let s = &states[e][g];
                driving[g] = (s.h_plus + s.psi_p).max(0.0);
            }
            let (r, k) = pf_element_system(&coords, &phi_e, &driving, frac, e)?;
            Ok(ElemOut { r, k })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut residual = vec![0.0; n_phi_free];
    let mut triplets = Vec::new();
    for (e, out) in per_elem.iter().enumerate() {
        let conn = mesh.elements[e].node_ids;
        for a in 0..8 {
            if let Some(ra) = phi_free[conn[a]] {
                residual[ra] += out.r[a];
                for b in 0..8 {
                    if let Some(cb) = phi_free[conn[b]] {
                        triplets.push(Triplet {
                            row: ra,
                            col: cb,
                            val: out.k[a][b],
                        });
                    }
                }
            }
        }
    }
    Ok((
        GlobalSystem {
            n: n_phi_free,
            triplets,
            symmetric: true,
        },
        residual,
    ))
}

/// Scalar summary of one converged increment.
#[derive(Debug, Clone)]
pub struct StepScalars {
    pub step: usize,
    pub load: f64,
    pub newton_iters: usize,
    /// Sum of internal forces over the reaction node set, N per mm
    /// thickness.
    pub reaction: f64,
    /// Filled by the case-level observer (crack extension, mm).
    pub delta_a: f64,
    pub max_phi: f64,
    /// Newton residual norms of the final staggered pass, for
    /// convergence-rate diagnostics.
    pub residual_history: Vec<f64>,
}

struct IncrementOutcome {
    newton_iters: usize,
    residual_history: Vec<f64>,
    f_int: Vec<f64>,
}

/// Shared per-run scratch: dof maps and cached factorizations.
pub struct Workspace {
    pub dofs: DofMap,
    pub phi_free: Vec<Option<usize>>,
    pub n_phi_free: usize,
    u_solver: DirectSolver,
    phi_solver: DirectSolver,
}

impl Workspace {
    pub fn build(mesh: &Mesh, bc: &BcProgram) -> Result<Workspace, SolverError> {
        let dofs = DofMap::build(mesh.n_nodes(), &bc.dirichlet)?;
        let mut phi_free = vec![None; mesh.n_nodes()];
        let seeded: std::collections::BTreeSet<usize> = bc.phi_ones.iter().copied().collect();
        let mut n_phi_free = 0;
        for (n, slot) in phi_free.iter_mut().enumerate() {
            if !seeded.contains(&n) {
                *slot = Some(n_phi_free);
                n_phi_free += 1;
            }
        }
        Ok(Workspace {
            dofs,
            phi_free,
            n_phi_free,
            u_solver: DirectSolver::new(),
            phi_solver: DirectSolver::new(),
        })
    }
}

/// Advance the solution from its committed state to `load_new`.
///
/// On success the Gauss-point history, displacement and phase field are
/// committed; on error the displacement and phase field may hold trial
/// values and the caller must restore them before retrying.
pub fn staggered_increment(
    setup: &CaseSetup,
    ws: &mut Workspace,
    state: &mut SolutionState,
    load_new: f64,
    step: usize,
) -> Result<StepScalars, SolverError> {
    let cfg = &setup.solver;
    let mesh = &setup.mesh;
    for &(dof, vpl) in &ws.dofs.constrained {
        state.u[dof] = vpl * load_new;
    }
    // Absolute floor keeping the relative test meaningful on zero-load
    // or fully-constrained increments.
    let abs_floor = 1e-10 * setup.material.e;

    let mut outcome = IncrementOutcome {
        newton_iters: 0,
        residual_history: Vec::new(),
        f_int: Vec::new(),
    };
    let mut trial: Vec<[GaussPointState; 4]> = state.gps.clone();

    for pass in 0..cfg.staggered_passes {
        // (1) Newton on u with phi frozen.
        let r0;
        let mut iters = 0;
        let mut history = Vec::new();
        let assemble = |u: &[f64], gps: &[[GaussPointState; 4]], phi: &[f64]| {
            assemble_displacement(mesh, gps, u, phi, &ws.dofs, &setup.material, &setup.fracture)
        };
        let mut asm = assemble(&state.u, &state.gps, &state.phi)?;
        let mut rnorm = asm.residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        r0 = rnorm;
        history.push(rnorm);
        let converged_assembly = loop {
            if rnorm <= cfg.newton_tol * r0 || rnorm <= abs_floor {
                break asm;
            }
            if iters >= cfg.newton_max_iter {
                return Err(SolverError::NewtonDiverged {
                    step,
                    iters,
                    residual: rnorm,
                });
            }
            let neg_r: Vec<f64> = asm.residual.iter().map(|v| -v).collect();
            let du = ws.u_solver.solve(&asm.system, &neg_r)?;
            // Backtracking line search: accept the largest step that
            // reduces the residual; a floor step is taken regardless so
            // the iteration cap, not the search, decides divergence.
            let u_base = state.u.clone();
            let mut alpha = 1.0_f64;
            let (asm_new, rn_new) = loop {
                for (dof, slot) in ws.dofs.free.iter().enumerate() {
                    if let Some(i) = slot {
                        state.u[dof] = u_base[dof] + alpha * du[*i];
                    }
                }
                let a2 = assemble(&state.u, &state.gps, &state.phi)?;
                let rn = a2.residual.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rn < rnorm || alpha <= 1.0 / 64.0 {
                    break (a2, rn);
                }
                alpha *= 0.5;
            };
            asm = asm_new;
            rnorm = rn_new;
            history.push(rnorm);
            iters += 1;
        };
        trial = converged_assembly.trial;
        outcome.newton_iters += iters;
        outcome.residual_history = history;
        outcome.f_int = converged_assembly.f_int;

        // (2) Recover the effective plastic strain gradient from the
        // converged plastic strain; it enters the *next* increment's flow
        // stress (one-increment lag).
        let etas: Vec<[f64; 4]> = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                let eps_p = [
                    trial[e][0].eps_p,
                    trial[e][1].eps_p,
                    trial[e][2].eps_p,
                    trial[e][3].eps_p,
                ];
                element_effective_gradients(&eps_p, &mesh.element_coords(e), e)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for e in 0..mesh.n_elements() {
            for g in 0..4 {
                trial[e][g].eta_p = etas[e][g];
                // (3) History update from the tensile elastic energy.
                let eps_e = trial[e][g].eps - trial[e][g].eps_p;
                let (psi_plus, _) = elastic_energy_split(eps_e, &setup.material);
                trial[e][g].h_plus = update_history(trial[e][g].h_plus, psi_plus);
            }
        }

        // (4) Single linear solve of the phase-field system.
        let (sys, r_phi) = assemble_phase(
            mesh,
            &trial,
            &state.phi,
            &ws.phi_free,
            ws.n_phi_free,
            &setup.fracture,
        )?;
        let neg_r: Vec<f64> = r_phi.iter().map(|v| -v).collect();
        let dphi = ws.phi_solver.solve(&sys, &neg_r)?;
        let mut max_dphi = 0.0_f64;
        for (node, slot) in ws.phi_free.iter().enumerate() {
            if let Some(i) = slot {
                let new = (state.phi[node] + dphi[*i]).clamp(0.0, 1.0);
                max_dphi = max_dphi.max((new - state.phi[node]).abs());
                state.phi[node] = new;
            }
        }
        if pass + 1 < cfg.staggered_passes && max_dphi < cfg.staggered_tol {
            break;
        }
    }

    // Commit.
    state.gps = trial;
    state.load = load_new;

    let reaction = setup
        .bc
        .reaction
        .iter()
        .map(|&(node, comp)| outcome.f_int[2 * node + comp])
        .sum();
    let max_phi = state.phi.iter().cloned().fold(0.0_f64, f64::max);
    Ok(StepScalars {
        step,
        load: load_new,
        newton_iters: outcome.newton_iters,
        reaction,
        delta_a: 0.0,
        max_phi,
        residual_history: outcome.residual_history,
    })
}

fn recoverable(err: &SolverError) -> bool {
    matches!(
        err,
        SolverError::NewtonDiverged { .. }
            | SolverError::Material(MaterialError::LocalNewtonDiverged { .. })
    )
}

/// Drive the full load path with a uniform increment schedule and
/// automatic cutbacks. The observer is called after every scheduled
/// increment and may fill `delta_a` (and record fields); one progress line
/// per increment goes to standard output.
pub fn run_loadpath<F>(
    setup: &CaseSetup,
    mut observe: F,
) -> Result<(SolutionState, Vec<StepScalars>), SolverError>
where
    F: FnMut(&SolutionState, &mut StepScalars),
{
    setup.solver.validate()?;
    setup.material.validate()?;
    setup.fracture.validate()?;
    setup.mesh.validate()?;

    let mut ws = Workspace::build(&setup.mesh, &setup.bc)?;
    let mut state = SolutionState::new(&setup.mesh, &setup.bc);
    let n = setup.solver.n_increments;
    let mut records = Vec::with_capacity(n);

    // Floor for snap-back subdivision: stop refining once the increment is
    // this small (relative to the whole load path).
    let dl_min = setup.bc.load_max.abs() * 5e-3;
    let mut prev_reaction: Option<f64> = None;
    for step in 1..=n {
        let target = setup.bc.load_max * step as f64 / n as f64;
        let mut dl = target - state.load;
        let mut cutbacks = 0;
        let mut subdivisions = 0;
        loop {
            let u_save = state.u.clone();
            let phi_save = state.phi.clone();
            let gps_save = state.gps.clone();
            let load_save = state.load;
            let load_new = state.load + dl;
            match staggered_increment(setup, &mut ws, &mut state, load_new, step) {
                Ok(mut scalars) => {
                    // Snap-back resolution: a converged increment that loses
                    // more than half the carried force is re-run with a finer
                    // increment so the recorded curve resolves the drop.
                    let sharp_drop = prev_reaction
                        .is_some_and(|p| p > 0.0 && scalars.reaction < 0.5 * p);
                    if sharp_drop && subdivisions < 8 && dl.abs() > dl_min {
                        state.u = u_save;
                        state.phi = phi_save;
                        state.gps = gps_save;
                        state.load = load_save;
                        subdivisions += 1;
                        dl *= 0.5;
                        continue;
                    }
                    observe(&state, &mut scalars);
                    println!(
                        "step {:4}  load {:>12.5e}  newton {:2}  reaction {:>13.6e}  da {:>8.4}  max_phi {:.4}",
                        scalars.step,
                        scalars.load,
                        scalars.newton_iters,
                        scalars.reaction,
                        scalars.delta_a,
                        scalars.max_phi
                    );
                    prev_reaction = Some(scalars.reaction);
                    records.push(scalars);
                    if (state.load - target).abs() <= 1e-12 * setup.bc.load_max.abs().max(1.0) {
                        break;
                    }
                    // Grow back after a subdivided stretch, never past the
                    // remaining distance to the target.
                    dl = (2.0 * dl).min(target - state.load);
                }
                Err(e) if recoverable(&e) => {
                    state.u = u_save;
                    state.phi = phi_save;
                    state.gps = gps_save;
                    state.load = load_save;
                    cutbacks += 1;
                    if cutbacks > setup.solver.max_cutbacks {
                        eprintln!("increment {step} abandoned: {e}");
                        return Err(SolverError::IncrementFailed { step, cutbacks });
                    }
                    dl *= setup.solver.cutback_factor;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok((state, records))
}
