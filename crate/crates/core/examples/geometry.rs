//! Build a perturbed disk lattice, check its assumptions and rasterize it.
//!
//! `cargo run --release --example geometry -- [shift]`

use porous_homog::geometry::{
    symdiff_volume, validate_assumptions, CellShape, Override, PerforationLattice, PerturbationSpec,
};
use porous_homog::grid::{rasterize, Boundary, MacGrid};

fn main() -> porous_homog::Result<()> {
    let shift: f64 = std::env::args()
        .nth(1)
        .map_or(0.1, |s| s.parse().expect("shift"));
    let base = CellShape::centered_ball(2, 0.25)?;
    let spec = PerturbationSpec::none()
        .with([1, 1, 0], Override::Remove)
        .with([2, 0, 0], Override::Translate([shift, 0.0, 0.0]));
    let lattice = PerforationLattice::new(base, spec, Default::default())?;

    let report = validate_assumptions(&lattice);
    println!("min inclusion margin {:.4}", report.min_inclusion_margin);
    println!("alpha sum {:.4}", report.alpha_sum);
    println!(
        "symmetric difference volume {:.6}",
        symdiff_volume(&lattice)
    );
    match report.first_violation(&lattice) {
        None => println!("all assumptions hold"),
        Some(e) => println!("violation: {e}"),
    }

    for m in [4, 8, 16] {
        let grid = MacGrid::unit(2, 16, m, Boundary::DirichletBox)?;
        let mask = rasterize(&lattice, &grid)?;
        println!("eps = 1/{m}: fluid fraction {:.4}", mask.fluid_fraction());
    }
    Ok(())
}
