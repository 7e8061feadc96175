//! Permeability tensor of a disk-perforated cell.
//!
//! `cargo run --release --example permeability -- [n] [radius]`

use porous_homog::cell::{permeability, PeriodicCorrectors, CORRECTOR_RTOL};
use porous_homog::geometry::CellShape;
use porous_homog::stokes::SolverConfig;

fn main() -> porous_homog::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(64, |s| s.parse().expect("n"));
    let r: f64 = args.next().map_or(0.25, |s| s.parse().expect("radius"));
    let shape = CellShape::centered_ball(2, r)?;
    let start = std::time::Instant::now();
    let c = PeriodicCorrectors::solve(&shape, n, &SolverConfig::with_rtol(CORRECTOR_RTOL))?;
    let k = permeability(&c)?;
    println!(
        "n = {n}, radius = {r}, {:.2} s",
        start.elapsed().as_secs_f64()
    );
    for i in 0..2 {
        println!("  [{:.10e}  {:.10e}]", k.a[i][0], k.a[i][1]);
    }
    println!("eigenvalues {:?}", k.eigenvalues);
    println!("velocity/energy gap {:.3e}", k.formula_gap());
    println!("symmetry defect {:.3e}", k.symmetry_defect);
    for (j, s) in c.stats.iter().enumerate() {
        println!(
            "w_{} : {} outer, {} inner iterations",
            j + 1,
            s.iterations,
            s.inner_iterations
        );
    }
    Ok(())
}
