//! Saddle-point solves on masked MAC grids.
//!
//! The discrete system is `-Delta_h u + grad_h p = f`, `div_h u = g`. With
//! `A = -Delta_h` and `grad_h = -D^T` the pressure solves the Schur
//! complement system `D A^{-1} D^T p = g - D A^{-1} f`, which is symmetric
//! positive definite on mean-zero pressures. It is solved by conjugate
//! gradients with inner conjugate-gradient solves for `A`.

mod eigen;
mod lift;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Discretization, FluidMask, MacGrid, PressureField, VelocityField};
use crate::linalg::{self, conjugate_gradient};

pub use eigen::{smallest_poincare_eigenvalue, EigenConfig, PoincareEstimate};
pub use lift::{divergence_lift, divergence_lift_with, LiftSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Conjugate gradients on the pressure Schur complement.
    UzawaCg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub rtol: f64,
    pub max_iterations: usize,
    /// Relative tolerance of the inner velocity solves; `rtol / 100` if unset.
    pub inner_rtol: Option<f64>,
    pub inner_max_iterations: usize,
    pub method: SolverMethod,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            max_iterations: 5000,
            inner_rtol: None,
            inner_max_iterations: 50_000,
            method: SolverMethod::UzawaCg,
        }
    }
}

impl SolverConfig {
    pub fn with_rtol(rtol: f64) -> Self {
        Self {
            rtol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::config(format!(
                "rtol must lie in (0, 1), got {}",
                self.rtol
            )));
        }
        if self.max_iterations == 0 || self.inner_max_iterations == 0 {
            return Err(Error::config("iteration limits must be positive"));
        }
        if let Some(t) = self.inner_rtol {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config("inner_rtol must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    fn inner(&self) -> f64 {
        self.inner_rtol.unwrap_or(self.rtol * 1e-2).max(1e-15)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Outer (pressure) iterations.
    pub iterations: usize,
    pub inner_iterations: usize,
    /// `||-Delta_h u + grad_h p - f|| / max(||f||, ||grad_h p||)`.
    pub momentum_residual: f64,
    /// `||div_h u - g|| / ||g - div_h A^{-1} f||`.
    pub divergence_residual: f64,
    pub converged: bool,
    pub wall_time_s: f64,
    /// `(outer iteration, relative pressure residual)`.
    pub log: Vec<(usize, f64)>,
}

impl SolveStats {
    pub fn final_residual(&self) -> f64 {
        self.momentum_residual.max(self.divergence_residual)
    }

    /// Line-oriented solve log: `iteration residual`.
    pub fn log_text(&self) -> String {
        let mut s = String::from("# iteration relative_residual\n");
        for (i, r) in &self.log {
            s.push_str(&format!("{i} {r:.6e}\n"));
        }
        s.push_str(&format!(
            "# momentum {:.3e} divergence {:.3e} inner {}\n",
            self.momentum_residual, self.divergence_residual, self.inner_iterations
        ));
        s
    }
}

#[derive(Clone, Debug)]
pub struct StokesProblem {
    pub grid: MacGrid,
    pub mask: FluidMask,
    pub forcing: VelocityField,
    /// Prescribed divergence; zero when absent.
    pub divergence: Option<PressureField>,
}

impl StokesProblem {
    pub fn new(grid: MacGrid, mask: FluidMask, forcing: VelocityField) -> Result<Self> {
        mask.check(&grid)?;
        forcing.check(&grid)?;
        if forcing.comps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::ShapeMismatch("forcing has non-finite values".into()));
        }
        Ok(Self {
            grid,
            mask,
            forcing,
            divergence: None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct StokesSolution {
    pub velocity: VelocityField,
    pub pressure: PressureField,
    pub stats: SolveStats,
}

pub fn solve_stokes(problem: &StokesProblem, cfg: &SolverConfig) -> Result<StokesSolution> {
    let disc = Discretization::new(&problem.grid, &problem.mask)?;
    let f = disc.gather_velocity(&problem.forcing);
    let g = match &problem.divergence {
        Some(g) => {
            g.check(&problem.grid)?;
            disc.gather_pressure(g)
        }
        None => vec![0.0; disc.n_p()],
    };
    let (u, p, stats) = SaddleSolver::new(&disc).solve(&f, &g, cfg)?;
    Ok(StokesSolution {
        velocity: disc.scatter_velocity(&u),
        pressure: disc.scatter_pressure(&p),
        stats,
    })
}

/// Reusable solver on a fixed discretization, working on dof vectors.
pub struct SaddleSolver<'a> {
    pub disc: &'a Discretization,
}

impl<'a> SaddleSolver<'a> {
    pub fn new(disc: &'a Discretization) -> Self {
        Self { disc }
    }

    /// Solve `A x = b`, returning the CG iteration count.
    fn solve_velocity(&self, b: &[f64], x: &mut [f64], rtol: f64, max: usize) -> Result<usize> {
        let d = self.disc;
        let out = if d.has_velocity_kernel() {
            conjugate_gradient(
                |v: &[f64], o: &mut [f64]| d.apply_laplacian(v, o),
                b,
                x,
                rtol,
                0.0,
                max,
                Some(|v: &mut [f64]| d.project_velocity(v)),
            )
        } else {
            conjugate_gradient(
                |v: &[f64], o: &mut [f64]| d.apply_laplacian(v, o),
                b,
                x,
                rtol,
                0.0,
                max,
                None::<linalg::NoProjection>,
            )
        };
        if !out.converged && out.residual > 1e3 * rtol * linalg::norm(b) {
            return Err(Error::NonConvergence(Box::new(SolveStats {
                inner_iterations: out.iterations,
                momentum_residual: out.residual / linalg::norm(b).max(f64::MIN_POSITIVE),
                ..SolveStats::default()
            })));
        }
        if d.has_velocity_kernel() {
            d.project_velocity(x);
        }
        Ok(out.iterations)
    }

    /// Returns `(u, p, stats)` with `p` of zero mean over the fluid cells.
    pub fn solve(
        &self,
        f: &[f64],
        g: &[f64],
        cfg: &SolverConfig,
    ) -> Result<(Vec<f64>, Vec<f64>, SolveStats)> {
        cfg.validate()?;
        let start = Instant::now();
        let d = self.disc;
        let (nv, np) = (d.n_vel(), d.n_p());
        let inner = cfg.inner();
        let mut stats = SolveStats::default();

        let mut f = f.to_vec();
        if d.has_velocity_kernel() {
            d.project_velocity(&mut f);
        }
        let mut u = vec![0.0; nv];
        let mut p = vec![0.0; np];
        if linalg::norm(&f) == 0.0 && linalg::norm(g) == 0.0 {
            stats.converged = true;
            return Ok((u, p, stats));
        }
        stats.inner_iterations +=
            self.solve_velocity(&f, &mut u, inner, cfg.inner_max_iterations)?;

        let residual = |u: &[f64]| {
            let mut r = vec![0.0; np];
            d.apply_div(u, &mut r);
            for (ri, gi) in r.iter_mut().zip(g) {
                *ri = gi - *ri;
            }
            linalg::remove_mean(&mut r);
            r
        };
        let mut r = residual(&u);
        let r0 = linalg::norm(&r);
        let target = cfg.rtol * r0;

        let mut rhs = vec![0.0; nv];
        let mut z = vec![0.0; nv];
        let mut sd = vec![0.0; np];
        let mut restarts = 0;
        if r0 > 0.0 {
            'restart: loop {
                let mut dir = r.clone();
                let mut rr = linalg::dot(&r, &r);
                loop {
                    if rr.sqrt() <= target {
                        break;
                    }
                    if stats.iterations >= cfg.max_iterations {
                        stats.divergence_residual = rr.sqrt() / r0;
                        stats.wall_time_s = start.elapsed().as_secs_f64();
                        return Err(Error::NonConvergence(Box::new(stats)));
                    }
                    // z = A^{-1} D^T dir,  S dir = D z
                    d.apply_grad(&dir, &mut rhs);
                    rhs.iter_mut().for_each(|v| *v = -*v);
                    z.iter_mut().for_each(|v| *v = 0.0);
                    stats.inner_iterations +=
                        self.solve_velocity(&rhs, &mut z, inner, cfg.inner_max_iterations)?;
                    d.apply_div(&z, &mut sd);
                    linalg::remove_mean(&mut sd);
                    let dsd = linalg::dot(&dir, &sd);
                    if !(dsd > 0.0) {
                        break;
                    }
                    let alpha = rr / dsd;
                    linalg::axpy(alpha, &dir, &mut p);
                    linalg::axpy(alpha, &z, &mut u);
                    linalg::axpy(-alpha, &sd, &mut r);
                    linalg::remove_mean(&mut r);
                    let rr_new = linalg::dot(&r, &r);
                    stats.iterations += 1;
                    stats.log.push((stats.iterations, rr_new.sqrt() / r0));
                    let beta = rr_new / rr;
                    for (di, ri) in dir.iter_mut().zip(&r) {
                        *di = ri + beta * *di;
                    }
                    rr = rr_new;
                }
                // recompute the velocity accurately and check the true residual
                d.apply_grad(&p, &mut rhs);
                for (ri, fi) in rhs.iter_mut().zip(&f) {
                    *ri = fi - *ri;
                }
                stats.inner_iterations +=
                    self.solve_velocity(&rhs, &mut u, inner * 1e-1, cfg.inner_max_iterations)?;
                r = residual(&u);
                if linalg::norm(&r) <= target || restarts >= 3 {
                    break 'restart;
                }
                restarts += 1;
            }
        }
        linalg::remove_mean(&mut p);

        // true residuals
        let mut au = vec![0.0; nv];
        d.apply_laplacian(&u, &mut au);
        let mut gp = vec![0.0; nv];
        d.apply_grad(&p, &mut gp);
        let mut mom = vec![0.0; nv];
        for i in 0..nv {
            mom[i] = au[i] + gp[i] - f[i];
        }
        if d.has_velocity_kernel() {
            d.project_velocity(&mut mom);
        }
        let scale = linalg::norm(&f)
            .max(linalg::norm(&gp))
            .max(f64::MIN_POSITIVE);
        stats.momentum_residual = linalg::norm(&mom) / scale;
        stats.divergence_residual = if r0 > 0.0 {
            linalg::norm(&residual(&u)) / r0
        } else {
            0.0
        };
        stats.wall_time_s = start.elapsed().as_secs_f64();
        stats.converged = stats.divergence_residual <= 10.0 * cfg.rtol
            && stats.momentum_residual <= 10.0 * cfg.rtol;
        if !stats.converged {
            return Err(Error::NonConvergence(Box::new(stats)));
        }
        Ok((u, p, stats))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CellShape, PerforationLattice};
    use crate::grid::{ops, rasterize, Boundary};

    #[test]
    fn zero_forcing_gives_zero_solution() {
        let g = MacGrid::unit(2, 8, 2, Boundary::DirichletBox).unwrap();
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let m = rasterize(&l, &g).unwrap();
        let pr = StokesProblem::new(g.clone(), m, VelocityField::zeros(&g)).unwrap();
        let s = solve_stokes(&pr, &SolverConfig::default()).unwrap();
        assert_eq!(s.velocity.max_abs(), 0.0);
        assert!(s.pressure.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn perforated_box_residuals_and_energy() {
        let g = MacGrid::unit(2, 8, 2, Boundary::DirichletBox).unwrap();
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let m = rasterize(&l, &g).unwrap();
        let f = VelocityField::from_fn(&g, |x| [(6.0 * x[1]).sin(), x[0], 0.0]);
        let pr = StokesProblem::new(g.clone(), m.clone(), f.clone()).unwrap();
        let s = solve_stokes(&pr, &SolverConfig::with_rtol(1e-10)).unwrap();
        assert!(
            s.stats.final_residual() <= 1e-9,
            "{:?}",
            s.stats.final_residual()
        );
        let d = Discretization::new(&g, &m).unwrap();
        let e = crate::grid::norms::velocity_norm(
            &g,
            &m,
            &s.velocity,
            crate::grid::NormKind::H1Semi,
            0.0,
        )
        .unwrap()
        .powi(2);
        let work = ops::inner_velocity(&d, &f, &s.velocity);
        assert!((e - work).abs() <= 1e-6 * work, "{e} {work}");
        assert!(s.pressure.fluid_mean(&m).abs() < 1e-12);
    }

    #[test]
    fn repeated_solves_are_bit_identical() {
        let g = MacGrid::unit(2, 8, 2, Boundary::DirichletBox).unwrap();
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let m = rasterize(&l, &g).unwrap();
        let f = VelocityField::from_fn(&g, |x| [x[1], -x[0], 0.0]);
        let pr = StokesProblem::new(g, m, f).unwrap();
        let a = solve_stokes(&pr, &SolverConfig::default()).unwrap();
        let b = solve_stokes(&pr, &SolverConfig::default()).unwrap();
        assert_eq!(a.stats.iterations, b.stats.iterations);
        assert_eq!(a.velocity, b.velocity);
        assert_eq!(a.pressure, b.pressure);
    }

    #[test]
    fn bad_config_rejected() {
        assert!(SolverConfig::with_rtol(0.0).validate().is_err());
        assert!(SolverConfig::with_rtol(1.5).validate().is_err());
    }
}
