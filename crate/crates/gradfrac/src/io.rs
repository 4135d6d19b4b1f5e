//! Run configuration, output files and the command-line entry point.
//!
//! Configs are TOML with sections mirroring the module layout
//! (`[case]`, `[material]`, `[fracture]`, `[solver]`, `[output]`).
//! Outputs are VTK-XML unstructured-grid snapshots, CSV curve files and a
//! plain-text log; all quantities carry units in headers. Units are fixed
//! repo-wide: mm, N, MPa, toughness in N/mm, stress intensity in
//! MPa·√mm.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;
use thiserror::Error;

use crate::cases::{
    measure_crack_extension, plastic_zone_extent, reference_quantities, CaseError, CaseSpec,
    RefQuantities,
};
use crate::material::MaterialParams;
use crate::mesh::Mesh;
use crate::phasefield::FractureParams;
use crate::solver::{
    run_loadpath, CaseSetup, SolutionState, SolverConfig, SolverError, StepScalars,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {msg}")]
    Config { path: PathBuf, msg: String },
    #[error("sweep parameter path `{0}` does not name a config section")]
    BadParam(String),
    #[error(transparent)]
    Case(#[from] CaseError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const KNOWN_FIELDS: &[&str] = &["phi", "u", "eps_p_eq", "eta_p", "psi_p", "sigma"];

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_snapshot_interval() -> usize {
    10
}
fn default_fields() -> Vec<String> {
    KNOWN_FIELDS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    /// Field snapshots every this many increments (>= 1).
    #[serde(default = "default_snapshot_interval")]
    pub snapshot_interval: usize,
    /// Subset of: phi, u, eps_p_eq, eta_p, psi_p, sigma.
    #[serde(default = "default_fields")]
    pub fields: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            snapshot_interval: default_snapshot_interval(),
            fields: default_fields(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseSpec,
    pub material: MaterialParams,
    pub fracture: FractureParams,
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.material.validate().map_err(|e| e.to_string())?;
        self.fracture.validate().map_err(|e| e.to_string())?;
        self.solver.validate().map_err(|e| e.to_string())?;
        if self.output.snapshot_interval < 1 {
            return Err(format!(
                "output.snapshot_interval must be >= 1, got {}",
                self.output.snapshot_interval
            ));
        }
        for f in &self.output.fields {
            if !KNOWN_FIELDS.contains(&f.as_str()) {
                return Err(format!(
                    "output.fields entry `{f}` unknown; expected one of {KNOWN_FIELDS:?}"
                ));
            }
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg: RunConfig = toml::from_str(&text).map_err(|e| IoError::Config {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    cfg.validate().map_err(|msg| IoError::Config {
        path: path.to_path_buf(),
        msg,
    })?;
    Ok(cfg)
}

/// Human-readable echo of all physical parameters with units, plus the
/// derived reference quantities. Forms the log header.
pub fn config_echo(cfg: &RunConfig) -> String {
    let m = &cfg.material;
    let f = &cfg.fracture;
    let q = reference_quantities(m, f);
    let mut s = String::new();
    let _ = writeln!(s, "case:     {} (h = {} mm)", cfg.case.kind_name(), cfg.case.h());
    let _ = writeln!(
        s,
        "material: E = {} MPa, nu = {}, sigma_Y = {} MPa, hardening = {:?}, \
         ell_p = {} mm, m = {}",
        m.e, m.nu, m.sigma_y, m.hardening, m.ell_p, m.m
    );
    let _ = writeln!(
        s,
        "fracture: Gc = {} N/mm, ell_f = {} mm, kappa = {:e}",
        f.gc, f.ell_f, f.kappa
    );
    let _ = writeln!(
        s,
        "derived:  K0 = {:.4} MPa*sqrt(mm), R0 = {:.4} mm, sigma_hat = {:.1} MPa \
         (sigma_hat/sigma_Y = {:.3}, ell_p/R0 = {:.3})",
        q.k0,
        q.r0,
        q.sigma_hat,
        q.strength_ratio,
        m.ell_p / q.r0
    );
    let _ = writeln!(
        s,
        "loading:  load_max = {} {} over {} increments",
        cfg.case.load_max(),
        cfg.case.load_unit(),
        cfg.solver.n_increments
    );
    s
}

/// Write a VTK-XML unstructured-grid snapshot: nodal phi and u,
/// cell-averaged eps_p_eq, eta_p, psi_p and undamaged stress components.
/// Values use full-precision scientific notation so re-reading is
/// bit-exact.
pub fn write_fields(
    mesh: &Mesh,
    state: &SolutionState,
    fields: &[String],
    path: &Path,
) -> std::io::Result<()> {
    let want = |name: &str| fields.iter().any(|f| f == name);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\"?>\n");
    s.push_str("<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n");
    s.push_str("  <UnstructuredGrid>\n");
    let _ = writeln!(
        s,
        "    <Piece NumberOfPoints=\"{}\" NumberOfCells=\"{}\">",
        mesh.n_nodes(),
        mesh.n_elements()
    );

    s.push_str("      <Points>\n        <DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n");
    for n in &mesh.nodes {
        let _ = writeln!(s, "          {:.17e} {:.17e} 0", n.coords[0], n.coords[1]);
    }
    s.push_str("        </DataArray>\n      </Points>\n");

    s.push_str("      <Cells>\n        <DataArray type=\"Int64\" Name=\"connectivity\" format=\"ascii\">\n");
    for e in &mesh.elements {
        s.push_str("         ");
        for id in e.node_ids {
            let _ = write!(s, " {id}");
        }
        s.push('\n');
    }
    s.push_str("        </DataArray>\n        <DataArray type=\"Int64\" Name=\"offsets\" format=\"ascii\">\n");
    for i in 1..=mesh.n_elements() {
        let _ = writeln!(s, "          {}", 8 * i);
    }
    s.push_str("        </DataArray>\n        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n");
    for _ in 0..mesh.n_elements() {
        s.push_str("          23\n"); // VTK_QUADRATIC_QUAD
    }
    s.push_str("        </DataArray>\n      </Cells>\n");

    s.push_str("      <PointData>\n");
    if want("phi") {
        s.push_str("        <DataArray type=\"Float64\" Name=\"phi\" format=\"ascii\">\n");
        for &v in &state.phi {
            let _ = writeln!(s, "          {v:.17e}");
        }
        s.push_str("        </DataArray>\n");
    }
    if want("u") {
        s.push_str(
            "        <DataArray type=\"Float64\" Name=\"u\" NumberOfComponents=\"3\" format=\"ascii\">\n",
        );
        for i in 0..mesh.n_nodes() {
            let _ = writeln!(s, "          {:.17e} {:.17e} 0", state.u[2 * i], state.u[2 * i + 1]);
        }
        s.push_str("        </DataArray>\n");
    }
    s.push_str("      </PointData>\n");

    s.push_str("      <CellData>\n");
    let cell_avg = |pick: &dyn Fn(usize, usize) -> f64| -> Vec<f64> {
        (0..mesh.n_elements())
            .map(|e| (0..4).map(|g| pick(e, g)).sum::<f64>() / 4.0)
            .collect()
    };
    let mut scalar = |name: &str, vals: Vec<f64>| {
        let _ = writeln!(
            s,
            "        <DataArray type=\"Float64\" Name=\"{name}\" format=\"ascii\">"
        );
        for v in vals {
            let _ = writeln!(s, "          {v:.17e}");
        }
        s.push_str("        </DataArray>\n");
    };
    if want("eps_p_eq") {
        scalar("eps_p_eq", cell_avg(&|e, g| state.gps[e][g].eps_p_eq));
    }
    if want("eta_p") {
        scalar("eta_p", cell_avg(&|e, g| state.gps[e][g].eta_p));
    }
    if want("psi_p") {
        scalar("psi_p", cell_avg(&|e, g| state.gps[e][g].psi_p));
    }
    if want("sigma") {
        scalar("sigma_xx", cell_avg(&|e, g| state.gps[e][g].sigma0.xx));
        scalar("sigma_yy", cell_avg(&|e, g| state.gps[e][g].sigma0.yy));
        scalar("sigma_zz", cell_avg(&|e, g| state.gps[e][g].sigma0.zz));
        scalar("sigma_xy", cell_avg(&|e, g| state.gps[e][g].sigma0.xy));
    }
    s.push_str("      </CellData>\n");

    s.push_str("    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n");
    fs::write(path, s)
}

/// Re-read the nodal `phi` array from a snapshot written by
/// [`write_fields`].
pub fn read_vtu_phi(path: &Path) -> Result<Vec<f64>, IoError> {
    let text = fs::read_to_string(path)?;
    let start = text
        .find("Name=\"phi\"")
        .ok_or_else(|| IoError::Config {
            path: path.to_path_buf(),
            msg: "no phi DataArray in snapshot".into(),
        })?;
    let body = &text[start..];
    let open = body.find('>').unwrap() + 1;
    let close = body.find("</DataArray>").ok_or_else(|| IoError::Config {
        path: path.to_path_buf(),
        msg: "unterminated phi DataArray".into(),
    })?;
    body[open..close]
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| IoError::Config {
                path: path.to_path_buf(),
                msg: format!("bad float `{tok}` in phi array: {e}"),
            })
        })
        .collect()
}

/// Write the per-increment curve file. Boundary-layer runs emit the
/// R-curve columns (K_I and crack extension, raw and normalized);
/// specimen runs emit displacement versus force (kN for the configured
/// thickness).
pub fn write_curves(
    records: &[StepScalars],
    case: &CaseSpec,
    q: &RefQuantities,
    path: &Path,
) -> std::io::Result<()> {
    let mut s = String::new();
    match case {
        CaseSpec::BoundaryLayer(_) => {
            let _ = writeln!(
                s,
                "# K0 = {:.17e} MPa*sqrt(mm), R0 = {:.17e} mm",
                q.k0, q.r0
            );
            s.push_str("# K_I [MPa*sqrt(mm)], K_I/K0 [-], delta_a [mm], delta_a/R0 [-], max_phi [-]\n");
            s.push_str("K_I,K_I_over_K0,delta_a,delta_a_over_R0,max_phi\n");
            for r in records {
                let _ = writeln!(
                    s,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    r.load,
                    r.load / q.k0,
                    r.delta_a,
                    r.delta_a / q.r0,
                    r.max_phi
                );
            }
        }
        _ => {
            let b = case.thickness();
            let _ = writeln!(s, "# thickness = {b:.17e} mm; force = reaction * thickness");
            s.push_str("# u [mm], force [kN], reaction [N/mm], delta_a [mm], max_phi [-]\n");
            s.push_str("u,force_kN,reaction,delta_a,max_phi\n");
            for r in records {
                let _ = writeln!(
                    s,
                    "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    r.load,
                    r.reaction * b / 1000.0,
                    r.reaction,
                    r.delta_a,
                    r.max_phi
                );
            }
        }
    }
    fs::write(path, s)
}

/// Run a fully parsed configuration end to end: build the case, drive the
/// load path, write snapshots, curves and a log. Returns the records.
pub fn run_config(cfg: &RunConfig) -> Result<Vec<StepScalars>, IoError> {
    let dir = &cfg.output.directory;
    fs::create_dir_all(dir)?;
    let header = config_echo(cfg);
    print!("{header}");

    let (mesh, bc, crack) = cfg.case.build(&cfg.material, &cfg.fracture)?;
    println!(
        "mesh:     {} elements, {} nodes",
        mesh.n_elements(),
        mesh.n_nodes()
    );
    let setup = CaseSetup {
        mesh,
        bc,
        material: cfg.material,
        fracture: cfg.fracture,
        solver: cfg.solver,
    };

    // Step-0 snapshot shows the initial crack seed.
    let state0 = SolutionState::new(&setup.mesh, &setup.bc);
    snapshot(&setup.mesh, &state0, &cfg.output, 0);

    let interval = cfg.output.snapshot_interval;
    let output = cfg.output.clone();
    let mesh_ref = setup.mesh.clone();
    let crack_ref = crack.clone();
    let started = std::time::Instant::now();
    let (final_state, records) = run_loadpath(&setup, |state, scalars| {
        if !crack_ref.nodes.is_empty() {
            scalars.delta_a =
                measure_crack_extension(&state.phi, &crack_ref, 0.95).unwrap_or(0.0);
        }
        if scalars.step % interval == 0 {
            snapshot(&mesh_ref, state, &output, scalars.step);
        }
    })?;
    let elapsed = started.elapsed().as_secs_f64();

    snapshot(&setup.mesh, &final_state, &cfg.output, cfg.solver.n_increments);
    let curve_name = match cfg.case {
        CaseSpec::BoundaryLayer(_) => "rcurve.csv",
        _ => "force_displacement.csv",
    };
    let q = reference_quantities(&cfg.material, &cfg.fracture);
    write_curves(&records, &cfg.case, &q, &dir.join(curve_name))?;

    // Small-scale-yielding runtime check for the boundary layer model.
    if let CaseSpec::BoundaryLayer(bl) = &cfg.case {
        let extent = plastic_zone_extent(&setup.mesh, &final_state.gps, 1e-4);
        if extent > bl.outer_radius / 20.0 {
            eprintln!(
                "warning: plastic zone extent {extent:.3} mm exceeds outer_radius/20 = {:.3} mm; \
                 small-scale-yielding assumption is degraded — enlarge outer_radius",
                bl.outer_radius / 20.0
            );
        }
    }

    let mut log = String::new();
    log.push_str(&header);
    let _ = writeln!(log, "runtime:  {elapsed:.1} s");
    log.push_str("step,load,newton_iters,reaction,delta_a,max_phi\n");
    for r in &records {
        let _ = writeln!(
            log,
            "{},{:.17e},{},{:.17e},{:.17e},{:.17e}",
            r.step, r.load, r.newton_iters, r.reaction, r.delta_a, r.max_phi
        );
    }
    fs::write(dir.join("run.log"), log)?;
    println!("runtime:  {elapsed:.1} s; outputs in {}", dir.display());
    Ok(records)
}

fn snapshot(mesh: &Mesh, state: &SolutionState, out: &OutputConfig, step: usize) {
    let path = out.directory.join(format!("step_{step:04}.vtu"));
    if let Err(e) = write_fields(mesh, state, &out.fields, &path) {
        eprintln!("warning: snapshot {} not written: {e}", path.display());
    }
}

/// Set a dotted-path key (e.g. `material.ell_p`) in a parsed TOML tree.
fn set_toml_path(root: &mut toml::Value, path: &str, value: f64) -> Result<(), IoError> {
    let mut parts: Vec<&str> = path.split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty());
    let (Some(leaf), false) = (leaf, parts.is_empty()) else {
        return Err(IoError::BadParam(path.to_string()));
    };
    let mut node = root;
    for p in parts {
        node = node
            .get_mut(p)
            .ok_or_else(|| IoError::BadParam(path.to_string()))?;
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| IoError::BadParam(path.to_string()))?;
    table.insert(leaf.to_string(), toml::Value::Float(value));
    Ok(())
}

#[derive(Parser)]
#[command(
    name = "gradfrac",
    about = "Coupled strain-gradient-plasticity / phase-field fracture solver",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation described by a TOML config.
    Run { config: PathBuf },
    /// Validate a config and print its derived quantities without solving.
    Check { config: PathBuf },
    /// Serial parameter sweep: rerun the config for each value of one
    /// dotted-path parameter, one output directory per value.
    Sweep {
        config: PathBuf,
        /// Dotted config path, e.g. material.ell_p
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

fn init_threads() {
    if let Ok(v) = std::env::var("GRADFRAC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            // Ignore failure: the global pool may already exist.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        } else {
            eprintln!("warning: GRADFRAC_THREADS=`{v}` is not a number; ignored");
        }
    }
}

fn sweep(config: &Path, param: &str, values: &[f64]) -> Result<(), IoError> {
    let text = fs::read_to_string(config).map_err(|source| IoError::Read {
        path: config.to_path_buf(),
        source,
    })?;
    let base: toml::Value = toml::from_str(&text).map_err(|e| IoError::Config {
        path: config.to_path_buf(),
        msg: e.to_string(),
    })?;
    for &v in values {
        let mut tree = base.clone();
        set_toml_path(&mut tree, param, v)?;
        let mut cfg: RunConfig = tree.try_into().map_err(|e: toml::de::Error| IoError::Config {
            path: config.to_path_buf(),
            msg: e.to_string(),
        })?;
        cfg.validate().map_err(|msg| IoError::Config {
            path: config.to_path_buf(),
            msg,
        })?;
        cfg.output.directory = cfg.output.directory.join(format!("{param}={v}"));
        println!("=== sweep {param} = {v} ===");
        run_config(&cfg)?;
    }
    Ok(())
}

/// CLI entry point; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    init_threads();
    let result = match &cli.cmd {
        Cmd::Run { config } => parse_config(config).and_then(|cfg| run_config(&cfg).map(|_| ())),
        Cmd::Check { config } => parse_config(config).map(|cfg| {
            print!("{}", config_echo(&cfg));
            println!("config ok");
        }),
        Cmd::Sweep {
            config,
            param,
            values,
        } => sweep(config, param, values),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
