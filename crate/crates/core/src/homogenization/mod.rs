//! Macroscopic Darcy problem, two-scale reconstruction and remainders.

mod darcy;
mod force;
mod reconstruct;
mod zcorr;

pub use darcy::{solve_darcy, tensor3, DarcySolution, DarcySummary};
pub use force::ForceField;
pub use reconstruct::{
    divergence_l2, reconstruct_first_order, remainder, FirstOrder, MacroPressure, RemainderReport,
};
pub use zcorr::{chi_bump, corrected_velocity, divergence_correctors, DivergenceCorrectors};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{permeability, CorrectorSet, PeriodicCorrectors};
    use crate::geometry::{CellShape, PerforationLattice};
    use crate::grid::{rasterize, Boundary, MacGrid};
    use crate::stokes::{solve_stokes, SolverConfig, StokesProblem};

    fn setup(m: usize, n: usize) -> (MacGrid, crate::grid::FluidMask, PeriodicCorrectors) {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        let per = PeriodicCorrectors::solve(&shape, n, &SolverConfig::with_rtol(1e-10)).unwrap();
        let grid = MacGrid::unit(2, n, m, Boundary::DirichletBox).unwrap();
        let mask = rasterize(&PerforationLattice::periodic(shape), &grid).unwrap();
        (grid, mask, per)
    }

    fn curl() -> ForceField {
        ForceField::CurlBump {
            center: vec![0.5, 0.5],
            radius: 0.4,
            amplitude: 1.0,
            axis: None,
        }
    }

    #[test]
    fn reconstruction_reduces_to_scaled_correctors() {
        let (grid, mask, per) = setup(4, 8);
        let set = CorrectorSet::from_periodic(&per);
        let f = curl();
        let first = reconstruct_first_order(&set, &f, MacroPressure::Zero, &grid, &mask).unwrap();
        let w0 = crate::grid::two_scale_sample(&per.w[0], &per.cell.grid, &grid).unwrap();
        let w1 = crate::grid::two_scale_sample(&per.w[1], &per.cell.grid, &grid).unwrap();
        for a in 0..2 {
            for (fi, v) in first.u1.comps[a].iter().enumerate() {
                let x = grid.face_center(a, grid.face_multi(a, fi));
                let fx = f.value(2, &x);
                let expect = if mask.faces[a][fi] {
                    (w0.comps[a][fi] * fx[0] + w1.comps[a][fi] * fx[1]) / 16.0
                } else {
                    0.0
                };
                assert!((v - expect).abs() <= 1e-15, "{v} {expect}");
            }
        }
    }

    fn relative_remainder(m: usize) -> f64 {
        let (grid, mask, per) = setup(m, 8);
        let set = CorrectorSet::from_periodic(&per);
        let f = curl();
        let first = reconstruct_first_order(&set, &f, MacroPressure::Zero, &grid, &mask).unwrap();
        let prob = StokesProblem::new(grid.clone(), mask.clone(), f.sample(&grid)).unwrap();
        let sol = solve_stokes(&prob, &SolverConfig::default()).unwrap();
        let rep = remainder(
            "plain",
            &grid,
            &mask,
            &sol.velocity,
            &sol.pressure,
            &first.u1,
            &first.p1,
            0.2,
        )
        .unwrap();
        let u_l2 = crate::grid::norms::velocity_norm(
            &grid,
            &mask,
            &sol.velocity,
            crate::grid::NormKind::L2,
            0.0,
        )
        .unwrap();
        rep.l2 / u_l2
    }

    #[test]
    fn relative_remainder_shrinks_with_epsilon() {
        let coarse = relative_remainder(4);
        let fine = relative_remainder(8);
        assert!(fine < 0.75 * coarse, "{coarse} -> {fine}");
    }

    fn divergence_ratio(m: usize) -> f64 {
        let (grid, mask, per) = setup(m, 8);
        let perm = permeability(&per).unwrap();
        let set = CorrectorSet::from_periodic(&per);
        let f = curl();
        let first = reconstruct_first_order(&set, &f, MacroPressure::Zero, &grid, &mask).unwrap();
        let zc = divergence_correctors(
            &per,
            &perm,
            &Default::default(),
            &SolverConfig::with_rtol(1e-10),
        )
        .unwrap();
        let hat = corrected_velocity(&first, &zc, &f, &grid, &mask).unwrap();
        let plain = divergence_l2(&grid, &mask, &first.u1).unwrap();
        let corrected = divergence_l2(&grid, &mask, &hat).unwrap();
        corrected / plain
    }

    #[test]
    fn divergence_correction_gains_a_power_of_epsilon() {
        let r: Vec<f64> = [8, 16, 32].iter().map(|m| divergence_ratio(*m)).collect();
        assert!(r[0] < 1.0);
        assert!(r[1] < 0.6 * r[0] && r[2] < 0.6 * r[1], "{r:?}");
    }
}
