//! Homogenized Darcy pressure for a gradient-type force.
//!
//! `cargo run --release --example darcy -- [cells]`

use porous_homog::cell::{permeability, PeriodicCorrectors, CORRECTOR_RTOL};
use porous_homog::geometry::CellShape;
use porous_homog::grid::{Boundary, MacGrid};
use porous_homog::homogenization::{solve_darcy, tensor3, ForceField};
use porous_homog::stokes::SolverConfig;

fn main() -> porous_homog::Result<()> {
    let m: usize = std::env::args()
        .nth(1)
        .map_or(64, |s| s.parse().expect("cells"));
    let shape = CellShape::centered_ball(2, 0.25)?;
    let k = permeability(&PeriodicCorrectors::solve(
        &shape,
        32,
        &SolverConfig::with_rtol(CORRECTOR_RTOL),
    )?)?;
    let a: Vec<Vec<f64>> = k.a.iter().map(|r| r.to_vec()).collect();
    let grid = MacGrid::unit(2, 1, m, Boundary::DirichletBox)?;
    for force in [
        ForceField::GradientBump {
            center: vec![0.5, 0.5],
            radius: 0.35,
            amplitude: 1.0,
        },
        ForceField::CurlBump {
            center: vec![0.5, 0.5],
            radius: 0.35,
            amplitude: 1.0,
            axis: None,
        },
    ] {
        let sol = solve_darcy(tensor3(&a), &force, &grid, &SolverConfig::with_rtol(1e-10))?;
        let s = sol.summary();
        println!(
            "{:<14} max |grad p0| = {:.3e}  p0(center) = {:+.5}  ({} iterations)",
            format!("{force:?}").split_whitespace().next().unwrap_or(""),
            s.max_grad_p0,
            sol.p0_at(&[0.5, 0.5, 0.0]),
            s.iterations
        );
    }
    Ok(())
}
