use super::{SaddleSolver, SolveStats, SolverConfig};
use crate::error::{Error, Result};
use crate::grid::norms::velocity_norm;
use crate::grid::{Discretization, FluidMask, MacGrid, NormKind, PressureField, VelocityField};

#[derive(Clone, Debug)]
pub struct LiftSolution {
    pub velocity: VelocityField,
    pub stats: SolveStats,
    /// `||v||_{W^{1,2}} / ||g||_{L^2}`.
    pub constant: f64,
    pub h1_semi: f64,
    pub l2: f64,
    pub g_l2: f64,
}

/// Minimal-energy field with `div_h v = g` on the fluid cells, vanishing on
/// solid and wall faces.
///
/// Minimizing `1/2 |grad v|^2` under the constraint is the Stokes problem
/// with zero forcing and divergence data `g`.
pub fn divergence_lift(
    grid: &MacGrid,
    mask: &FluidMask,
    g: &PressureField,
    cfg: &SolverConfig,
) -> Result<LiftSolution> {
    let disc = Discretization::new(grid, mask)?;
    divergence_lift_with(&disc, mask, g, cfg)
}

pub fn divergence_lift_with(
    disc: &Discretization,
    mask: &FluidMask,
    g: &PressureField,
    cfg: &SolverConfig,
) -> Result<LiftSolution> {
    let grid = &disc.grid;
    g.check(grid)?;
    let gv = disc.gather_pressure(g);
    let rms = (gv.iter().map(|v| v * v).sum::<f64>() / gv.len().max(1) as f64).sqrt();
    let mean = gv.iter().sum::<f64>() / gv.len().max(1) as f64;
    let tol = 1e-8 * rms;
    if mean.abs() > tol {
        return Err(Error::IncompatibleData { mean, tol });
    }
    let f = vec![0.0; disc.n_vel()];
    let (v, _, stats) = SaddleSolver::new(disc).solve(&f, &gv, cfg)?;
    let velocity = disc.scatter_velocity(&v);
    let h1_semi = velocity_norm(grid, mask, &velocity, NormKind::H1Semi, 0.0)?;
    let l2 = velocity_norm(grid, mask, &velocity, NormKind::L2, 0.0)?;
    let g_l2 = crate::grid::norms::pressure_norm(grid, mask, g, NormKind::L2, 0.0)?;
    let constant = if g_l2 > 0.0 {
        (h1_semi * h1_semi + l2 * l2).sqrt() / g_l2
    } else {
        0.0
    };
    Ok(LiftSolution {
        velocity,
        stats,
        constant,
        h1_semi,
        l2,
        g_l2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{ops, Boundary};

    #[test]
    fn zero_data_zero_lift() {
        let g = MacGrid::unit(2, 8, 1, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let s =
            divergence_lift(&g, &m, &PressureField::zeros(&g), &SolverConfig::default()).unwrap();
        assert_eq!(s.velocity.max_abs(), 0.0);
        assert_eq!(s.constant, 0.0);
    }

    #[test]
    fn lift_has_requested_divergence() {
        let g = MacGrid::unit(2, 16, 1, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let tau = std::f64::consts::TAU;
        let data = PressureField::from_fn(&g, |x| (tau * x[0]).sin() * (tau * x[1]).sin());
        let s = divergence_lift(&g, &m, &data, &SolverConfig::with_rtol(1e-10)).unwrap();
        let d = Discretization::new(&g, &m).unwrap();
        let dv = ops::div(&d, &s.velocity).unwrap();
        let err = dv
            .values
            .iter()
            .zip(&data.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn incompatible_data_rejected() {
        let g = MacGrid::unit(2, 8, 1, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let data = PressureField::from_fn(&g, |_| 1.0);
        assert!(matches!(
            divergence_lift(&g, &m, &data, &SolverConfig::default()),
            Err(Error::IncompatibleData { .. })
        ));
    }
}
