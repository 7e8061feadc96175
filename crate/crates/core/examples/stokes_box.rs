//! Stokes flow through a perforated unit square driven by a compact swirl.
//!
//! `cargo run --release --example stokes_box -- [cells per side] [n]`

use porous_homog::geometry::{CellShape, PerforationLattice};
use porous_homog::grid::norms::{pressure_norm, velocity_norm};
use porous_homog::grid::{rasterize, Boundary, MacGrid, NormKind};
use porous_homog::homogenization::ForceField;
use porous_homog::stokes::{solve_stokes, SolverConfig, StokesProblem};

fn main() -> porous_homog::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(8, |s| s.parse().expect("cells"));
    let n: usize = args.next().map_or(16, |s| s.parse().expect("n"));
    let lattice = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25)?);
    let grid = MacGrid::unit(2, n, m, Boundary::DirichletBox)?;
    let mask = rasterize(&lattice, &grid)?;
    let force = ForceField::CurlBump {
        center: vec![0.5, 0.5],
        radius: 0.4,
        amplitude: 1.0,
        axis: None,
    };
    let problem = StokesProblem::new(grid.clone(), mask.clone(), force.sample(&grid))?;
    let sol = solve_stokes(&problem, &SolverConfig::default())?;
    let eps = grid.epsilon();
    let u = velocity_norm(&grid, &mask, &sol.velocity, NormKind::L2, 0.0)?;
    let du = velocity_norm(&grid, &mask, &sol.velocity, NormKind::H1Semi, 0.0)?;
    let p = pressure_norm(&grid, &mask, &sol.pressure, NormKind::L2, 0.0)?;
    println!("eps = {eps}, {} fluid cells", mask.fluid_cell_count());
    println!("|u| / eps^2 = {:.5}", u / (eps * eps));
    println!("|grad u| / eps = {:.5}", du / eps);
    println!("|p|_(L2/R) = {p:.5}");
    println!(
        "{} outer, {} inner iterations, residual {:.2e}",
        sol.stats.iterations,
        sol.stats.inner_iterations,
        sol.stats.final_residual()
    );
    Ok(())
}
