//! The `homog` command line.
//!
//! Exit codes: 0 success, 1 validation or assertion failure, 2 solver
//! non-convergence, 3 configuration or input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cell::{permeability, CorrectorMetadata, PeriodicCorrectors, CORRECTOR_RTOL};
use crate::config::{write_atomic, Document};
use crate::error::{Error, Result};
use crate::experiments::{run_study, LatticeRef, StudySpec};
use crate::geometry::{validate_assumptions, DomainSpec, PerforationLattice};
use crate::grid::io::{read_csv, write_csv, write_field, FieldData};
use crate::grid::norms::{pressure_norm, velocity_norm};
use crate::grid::{rasterize, Boundary, MacGrid, NormKind};
use crate::homogenization::{solve_darcy, tensor3, ForceField};
use crate::stokes::{solve_stokes, SolverConfig, StokesProblem};

#[derive(Parser, Debug)]
#[command(name = "homog", version, about = "Stokes flow in perforated domains")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice geometry.
    #[command(subcommand)]
    Geom(GeomCommand),
    /// Periodic cell problems.
    #[command(subcommand)]
    Cell(CellCommand),
    /// Stokes problems in a perforated box.
    #[command(subcommand)]
    Solve(SolveCommand),
    /// Homogenized Darcy problem.
    #[command(subcommand)]
    Darcy(DarcyCommand),
    /// Parameter studies.
    #[command(subcommand)]
    Study(StudyCommand),
    /// Report files.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Subcommand, Debug)]
enum GeomCommand {
    /// Check the geometric assumptions of a lattice file.
    Validate(Common),
}

#[derive(Subcommand, Debug)]
enum CellCommand {
    /// Solve the cell problems and write the corrector fields.
    Corrector {
        #[command(flatten)]
        common: Common,
        /// Only this direction (0-based).
        #[arg(long)]
        j: Option<usize>,
    },
    /// Permeability tensor as CSV.
    Permeability(Common),
}

#[derive(Subcommand, Debug)]
enum SolveCommand {
    Stokes(Common),
}

#[derive(Subcommand, Debug)]
enum DarcyCommand {
    Solve(Common),
}

#[derive(Subcommand, Debug)]
enum StudyCommand {
    Run(Common),
}

#[derive(Subcommand, Debug)]
enum ReportCommand {
    /// Print a CSV report as an aligned table.
    Show { path: PathBuf },
}

#[derive(Args, Debug)]
struct Common {
    config: PathBuf,
    /// Dotted-key override, e.g. `--set solver.rtol=1e-9`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell resolution, shorthand for `--set n=N`.
    #[arg(long)]
    n: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Vec<String> {
        let mut o = self.overrides.clone();
        if let Some(n) = self.n {
            o.push(format!("n={n}"));
        }
        o
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let stem = self
                .config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            PathBuf::from("out").join(stem)
        })
    }
}

/// Settings shared by `cell`, `solve` and `darcy`.
///
/// ```toml
/// lattice = "ball2d.toml"
/// n = 32
/// epsilon = 0.25
/// permeability = [[0.01, 0.0], [0.0, 0.01]]   # darcy only, optional
///
/// [force]
/// kind = "curl_bump"
/// center = [0.5, 0.5]
/// radius = 0.35
/// amplitude = 1.0
/// ```
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeRef,
    pub n: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub force: Option<ForceField>,
    #[serde(default = "default_margin")]
    pub interior_margin: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "corrector_solver")]
    pub corrector_solver: SolverConfig,
    #[serde(default)]
    pub permeability: Option<Vec<Vec<f64>>>,
}

fn default_margin() -> f64 {
    0.2
}

fn corrector_solver() -> SolverConfig {
    SolverConfig::with_rtol(CORRECTOR_RTOL)
}

struct Loaded {
    cfg: RunConfig,
    lattice: PerforationLattice,
}

impl Loaded {
    fn read(common: &Common) -> Result<Self> {
        let doc = Document::read(&common.config, &common.overrides())?;
        let cfg: RunConfig = doc.parse()?;
        cfg.solver.validate()?;
        cfg.corrector_solver.validate()?;
        let lattice = cfg.lattice.resolve(&doc.base_dir())?;
        Ok(Self { cfg, lattice })
    }

    fn scale(&self) -> Result<usize> {
        let e = self
            .cfg
            .epsilon
            .ok_or_else(|| Error::config("epsilon is required"))?;
        let m = (1.0 / e).round();
        if !(e > 0.0 && e <= 1.0) || (1.0 / e - m).abs() > 1e-9 * m {
            return Err(Error::config(format!("epsilon {e} is not 1/integer")));
        }
        Ok(m as usize)
    }

    fn force(&self) -> Result<&ForceField> {
        let f = self
            .cfg
            .force
            .as_ref()
            .ok_or_else(|| Error::config("a [force] table is required"))?;
        f.validate(self.lattice.dim)?;
        Ok(f)
    }

    fn macro_grid(&self) -> Result<MacGrid> {
        let dim = self.lattice.dim;
        let domain = DomainSpec::unit(dim, self.cfg.interior_margin)?;
        MacGrid::new(self.cfg.n, self.scale()?, domain, Boundary::DirichletBox)
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn geom_validate(c: &Common) -> Result<i32> {
    let lattice = crate::geometry::load_lattice(&c.config, &c.overrides())?;
    let report = validate_assumptions(&lattice);
    let text = json(&report);
    println!("{text}");
    if let Some(dir) = &c.out {
        write_atomic(&dir.join("assumptions.json"), text.as_bytes())?;
    }
    match report.first_violation(&lattice) {
        None => Ok(0),
        Some(e) => {
            eprintln!("homog: {e}");
            Ok(1)
        }
    }
}

fn cell_corrector(c: &Common, only: Option<usize>) -> Result<i32> {
    let run = Loaded::read(c)?;
    let dim = run.lattice.dim;
    let out = c.out_dir();
    let shape = &run.lattice.base_shape;
    let hash = PerforationLattice::periodic(shape.clone()).fingerprint();
    let cell = crate::cell::PeriodicCell::new(shape, run.cfg.n)?;
    let dirs: Vec<usize> = match only {
        Some(j) if j < dim => vec![j],
        Some(j) => {
            return Err(Error::config(format!(
                "j = {j} out of range for dimension {dim}"
            )))
        }
        None => (0..dim).collect(),
    };
    for j in dirs {
        let (w, p, stats) = cell.corrector(j, &run.cfg.corrector_solver)?;
        let meta = CorrectorMetadata {
            shape_hash: hash,
            n: run.cfg.n,
            j,
            bc: "periodic".into(),
            lambda: 0.0,
        }
        .to_map();
        write_field(
            &out.join(format!("w{j}.field")),
            &cell.grid,
            &FieldData::Velocity(w),
            &meta,
        )?;
        write_field(
            &out.join(format!("p{j}.field")),
            &cell.grid,
            &FieldData::Pressure(p),
            &meta,
        )?;
        write_atomic(&out.join(format!("w{j}.log")), stats.log_text().as_bytes())?;
        println!(
            "w_{j}: {} outer / {} inner iterations, residual {:.3e}",
            stats.iterations,
            stats.inner_iterations,
            stats.final_residual()
        );
    }
    println!("wrote {}", out.display());
    Ok(0)
}

fn cell_permeability(c: &Common) -> Result<i32> {
    let run = Loaded::read(c)?;
    let per = PeriodicCorrectors::solve(
        &run.lattice.base_shape,
        run.cfg.n,
        &run.cfg.corrector_solver,
    )?;
    let k = permeability(&per)?;
    let (headers, rows) = k.csv_rows();
    let path = c.out_dir().join("permeability.csv");
    write_csv(&path, &headers, &rows)?;
    print_table(&headers, &rows);
    println!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct StokesSummary {
    epsilon: f64,
    n: usize,
    cells: Vec<usize>,
    lattice_hash: String,
    velocity_l2: f64,
    velocity_h1_semi: f64,
    pressure_l2_quotient: f64,
    stats: crate::stokes::SolveStats,
}

fn solve_stokes_cmd(c: &Common) -> Result<i32> {
    let run = Loaded::read(c)?;
    let force = run.force()?;
    let grid = run.macro_grid()?;
    let mask = rasterize(&run.lattice, &grid)?;
    let prob = StokesProblem::new(grid.clone(), mask.clone(), force.sample(&grid))?;
    let sol = solve_stokes(&prob, &run.cfg.solver)?;
    let out = c.out_dir();
    let mut meta = std::collections::BTreeMap::new();
    meta.insert(
        "lattice_hash".to_string(),
        format!("{:016x}", run.lattice.fingerprint()),
    );
    write_field(
        &out.join("velocity.field"),
        &grid,
        &FieldData::Velocity(sol.velocity.clone()),
        &meta,
    )?;
    write_field(
        &out.join("pressure.field"),
        &grid,
        &FieldData::Pressure(sol.pressure.clone()),
        &meta,
    )?;
    write_field(
        &out.join("mask.field"),
        &grid,
        &FieldData::Mask(mask.clone()),
        &meta,
    )?;
    let summary = StokesSummary {
        epsilon: grid.epsilon(),
        n: grid.n,
        cells: grid.cells[..grid.dim].to_vec(),
        lattice_hash: meta["lattice_hash"].clone(),
        velocity_l2: velocity_norm(&grid, &mask, &sol.velocity, NormKind::L2, 0.0)?,
        velocity_h1_semi: velocity_norm(&grid, &mask, &sol.velocity, NormKind::H1Semi, 0.0)?,
        pressure_l2_quotient: pressure_norm(
            &grid,
            &mask,
            &sol.pressure,
            NormKind::L2Quotient,
            0.0,
        )?,
        stats: sol.stats.clone(),
    };
    write_atomic(&out.join("stokes.log"), sol.stats.log_text().as_bytes())?;
    let text = json(&summary);
    write_atomic(&out.join("stokes.json"), text.as_bytes())?;
    println!("{text}");
    Ok(0)
}

fn darcy_solve(c: &Common) -> Result<i32> {
    let run = Loaded::read(c)?;
    let force = run.force()?;
    let dim = run.lattice.dim;
    let a = match &run.cfg.permeability {
        Some(a) => {
            if a.len() != dim || a.iter().any(|r| r.len() != dim) {
                return Err(Error::config(format!("permeability must be {dim}x{dim}")));
            }
            a.clone()
        }
        None => {
            let per = PeriodicCorrectors::solve(
                &run.lattice.base_shape,
                run.cfg.n,
                &run.cfg.corrector_solver,
            )?;
            permeability(&per)?.a
        }
    };
    let grid = run.macro_grid()?;
    let sol = solve_darcy(tensor3(&a), force, &grid, &run.cfg.solver)?;
    let out = c.out_dir();
    let meta = std::collections::BTreeMap::new();
    write_field(
        &out.join("p0.field"),
        &grid,
        &FieldData::Pressure(sol.p0.clone()),
        &meta,
    )?;
    write_field(
        &out.join("u_star.field"),
        &grid,
        &FieldData::Velocity(sol.u_star.clone()),
        &meta,
    )?;
    #[derive(Serialize)]
    struct Out<'a> {
        permeability: &'a [Vec<f64>],
        summary: crate::homogenization::DarcySummary,
    }
    let text = json(&Out {
        permeability: &a,
        summary: sol.summary(),
    });
    write_atomic(&out.join("darcy.json"), text.as_bytes())?;
    println!("{text}");
    Ok(0)
}

fn study_run(c: &Common) -> Result<i32> {
    let spec = StudySpec::load(&c.config, &c.overrides())?;
    let report = run_study(&spec)?;
    let dir = c.out.clone().unwrap_or_else(|| spec.output_dir());
    let files = report.write(&dir)?;
    for line in report.check_lines() {
        println!("{line}");
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    println!(
        "{} {}",
        report.study,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.pass { 0 } else { 1 })
}

fn print_table(headers: &[String], rows: &[Vec<String>]) {
    let mut w: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in rows {
        for (i, v) in r.iter().enumerate() {
            if i < w.len() {
                w[i] = w[i].max(v.len());
            }
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&w)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    println!("{}", line(headers));
    for r in rows {
        println!("{}", line(r));
    }
}

fn report_show(path: &Path) -> Result<i32> {
    let (headers, rows) = read_csv(path)?;
    print_table(&headers, &rows);
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match cli.command {
        Command::Geom(GeomCommand::Validate(c)) => geom_validate(&c),
        Command::Cell(CellCommand::Corrector { common, j }) => cell_corrector(&common, j),
        Command::Cell(CellCommand::Permeability(c)) => cell_permeability(&c),
        Command::Solve(SolveCommand::Stokes(c)) => solve_stokes_cmd(&c),
        Command::Darcy(DarcyCommand::Solve(c)) => darcy_solve(&c),
        Command::Study(StudyCommand::Run(c)) => study_run(&c),
        Command::Report(ReportCommand::Show { path }) => report_show(&path),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("homog: {e}");
            e.exit_code()
        }
    }
}
