//! Plane-strain finite element solver coupling mechanism-based
//! (Taylor-dislocation) strain gradient plasticity with AT2 phase-field
//! fracture.
//!
//! The crate is organised around the stages of a coupled simulation:
//!
//! * [`mesh`] — 8-node serendipity quadrilaterals, quadrature, shape
//!   functions and Gauss-to-node recovery, plus a small text mesh format.
//! * [`material`] — the CMSG viscoplastic constitutive update at a Gauss
//!   point, Taylor-model flow stress and the Amor tension/compression split.
//! * [`gradient`] — the plastic strain gradient tensor and its effective
//!   scalar invariant.
//! * [`phasefield`] — AT2 phase-field energetics, history field and the
//!   damage sub-problem element matrices.
//! * [`solver`] — global assembly, sparse direct solves and the staggered
//!   incremental scheme.
//! * [`cases`] — the three benchmark problems (boundary layer, compact
//!   tension, asymmetric double-notch) and derived quantities.
//! * [`io`] — run configuration, VTK/CSV output and the CLI entry point.
//!
//! Units are fixed crate-wide: lengths in mm, forces in N, stresses in MPa,
//! toughness in N/mm (= MPa·mm) and stress intensity factors in MPa·√mm.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod cases;
pub mod gradient;
pub mod io;
pub mod material;
pub mod mesh;
pub mod phasefield;
pub mod solver;
pub mod tensor;

pub use material::{GaussPointState, MaterialParams};
pub use phasefield::FractureParams;
pub use solver::SolverConfig;
