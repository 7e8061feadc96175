//! Corrector of a lattice with one hole removed, on boxes of growing size.
//!
//! `cargo run --release --example truncated_corrector -- [n]`

use porous_homog::cell::{h1_difference_on_subbox, solve_truncated_corrector, PeriodicCorrectors};
use porous_homog::geometry::{CellShape, Override, PerforationLattice, PerturbationSpec};
use porous_homog::stokes::SolverConfig;

fn main() -> porous_homog::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(8, |s| s.parse().expect("n"));
    let base = CellShape::centered_ball(2, 0.25)?;
    let cfg = SolverConfig::with_rtol(1e-10);
    let per = PeriodicCorrectors::solve(&base, n, &cfg)?;
    let spec = PerturbationSpec::none().with([0, 0, 0], Override::Remove);
    let lattice = PerforationLattice::new(base, spec, Default::default())?;
    let mut prev = None;
    for r in [1, 2, 4] {
        let t = solve_truncated_corrector(&lattice, r, &per, 0, &cfg)?;
        print!(
            "R = {r}: |w~|_H1 = {:.5}, energy near the removal {:.3}",
            t.tilde_h1()?,
            t.energy_fraction_near([0, 0, 0], 1)
        );
        if let Some(p) = &prev {
            print!(
                ", |w(R/2) - w(R)| = {:.3e}",
                h1_difference_on_subbox(p, &t)?
            );
        }
        println!();
        prev = Some(t);
    }
    Ok(())
}
