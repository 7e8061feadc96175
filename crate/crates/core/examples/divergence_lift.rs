//! Minimal-energy lift of a divergence on growing boxes of cells.
//!
//! `cargo run --release --example divergence_lift -- [n]`

use porous_homog::geometry::{CellShape, PerforationLattice};
use porous_homog::grid::{rasterize, MacGrid, PressureField};
use porous_homog::stokes::{divergence_lift, SolverConfig};

fn main() -> porous_homog::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(8, |s| s.parse().expect("n"));
    let lattice = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25)?);
    for r in [1i64, 2, 4, 8] {
        let grid = MacGrid::cell_box(2, n, [0; 3], [r - 1, r - 1, 0])?;
        let mask = rasterize(&lattice, &grid)?;
        let lo = grid.domain.origin[0];
        let mut g = PressureField::from_fn(&grid, |x| {
            (std::f64::consts::PI * (x[0] - lo) / r as f64).cos()
        });
        let mean = g.fluid_mean(&mask);
        for (v, fluid) in g.values.iter_mut().zip(&mask.cells) {
            *v = if *fluid { *v - mean } else { 0.0 };
        }
        let lift = divergence_lift(&grid, &mask, &g, &SolverConfig::with_rtol(1e-8))?;
        println!(
            "R = {r}: |v|_W12 / |g|_L2 = {:.4}  ({} iterations)",
            lift.constant, lift.stats.iterations
        );
    }
    Ok(())
}
