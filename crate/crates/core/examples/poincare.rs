//! Smallest Dirichlet eigenvalue of the perforated box as eps shrinks.
//!
//! `cargo run --release --example poincare -- [n]`

use porous_homog::experiments::fit_loglog_slope;
use porous_homog::geometry::{CellShape, PerforationLattice};
use porous_homog::grid::{rasterize, Boundary, MacGrid};
use porous_homog::stokes::{smallest_poincare_eigenvalue, EigenConfig};

fn main() -> porous_homog::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map_or(16, |s| s.parse().expect("n"));
    let lattice = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25)?);
    let cfg = EigenConfig::default();
    let mut pts = Vec::new();
    for m in [4, 8, 16] {
        let grid = MacGrid::unit(2, n, m, Boundary::DirichletBox)?;
        let mask = rasterize(&lattice, &grid)?;
        let est = smallest_poincare_eigenvalue(&grid, &mask, &cfg)?;
        println!(
            "eps = 1/{m:<2}  lambda_min = {:>12.4}  eps^2 lambda_min = {:.4}",
            est.lambda_min,
            est.lambda_min / (m * m) as f64
        );
        pts.push((1.0 / m as f64, est.lambda_min));
    }
    let fit = fit_loglog_slope(&pts)?;
    println!("slope {:.3}, log residual {:.2e}", fit.slope, fit.residual);
    Ok(())
}
