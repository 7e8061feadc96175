use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellLaplacian, FluidMask, MacGrid};
use crate::linalg::{self, conjugate_gradient, NoProjection};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenConfig {
    /// Relative accuracy of the eigenvalue.
    pub tol: f64,
    pub max_iterations: usize,
    pub inner_rtol: f64,
    pub inner_max_iterations: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iterations: 20_000,
            inner_rtol: 1e-10,
            inner_max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoincareEstimate {
    pub lambda_min: f64,
    /// `1 / (epsilon^2 lambda_min)`.
    pub poincare_constant: f64,
    pub iterations: usize,
    pub inner_iterations: usize,
}

/// Smallest eigenvalue of the cell-centered Dirichlet Laplacian on the fluid
/// cells by inverse iteration.
///
/// Iteration stops once the estimated remaining error of the Rayleigh
/// quotient, extrapolated from the observed geometric contraction of its
/// increments, is below `tol` relative.
pub fn smallest_poincare_eigenvalue(
    grid: &MacGrid,
    mask: &FluidMask,
    cfg: &EigenConfig,
) -> Result<PoincareEstimate> {
    let lap = CellLaplacian::new(grid, mask)?;
    if lap.is_empty() {
        return Err(Error::SingularSystem("no fluid cells".into()));
    }
    if lap.has_kernel {
        return Err(Error::SingularSystem(
            "periodic box without holes has no Dirichlet boundary".into(),
        ));
    }
    // smooth positive start: product of half-sines across the box
    let mut x: Vec<f64> = lap
        .dof_to_cell
        .iter()
        .map(|&c| {
            let p = grid.cell_center(grid.cell_multi(c as usize));
            (0..grid.dim)
                .map(|a| {
                    if grid.is_periodic() {
                        1.0
                    } else {
                        let t = (p[a] - grid.domain.origin[a]) / grid.domain.lengths[a];
                        (std::f64::consts::PI * t).sin()
                    }
                })
                .product()
        })
        .collect();
    let nx = linalg::norm(&x);
    linalg::scale(1.0 / nx, &mut x);

    let mut y = vec![0.0; x.len()];
    let mut lambda_prev = f64::NAN;
    let mut delta_prev = f64::NAN;
    let mut inner_total = 0usize;
    for it in 1..=cfg.max_iterations {
        // warm start: y ~ x / lambda
        if lambda_prev.is_finite() {
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = xi / lambda_prev;
            }
        }
        let out = conjugate_gradient(
            |v: &[f64], o: &mut [f64]| lap.apply(v, o),
            &x,
            &mut y,
            cfg.inner_rtol,
            0.0,
            cfg.inner_max_iterations,
            None::<NoProjection>,
        );
        inner_total += out.iterations;
        if !out.converged {
            return Err(Error::NonConvergence(Box::new(crate::stokes::SolveStats {
                iterations: it,
                inner_iterations: inner_total,
                momentum_residual: out.residual,
                ..Default::default()
            })));
        }
        // Rayleigh quotient of y: (y, L y) / (y, y) with L y = x
        let lambda = linalg::dot(&y, &x) / linalg::dot(&y, &y);
        let ny = linalg::norm(&y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
        if lambda_prev.is_finite() {
            let delta = (lambda - lambda_prev).abs();
            let done = if delta <= 1e-14 * lambda {
                true
            } else if delta_prev.is_finite() && delta_prev > 0.0 {
                let rho = (delta / delta_prev).min(0.999_999);
                it >= 3 && delta * rho / (1.0 - rho) <= cfg.tol * lambda
            } else {
                false
            };
            if done {
                let eps = grid.epsilon();
                return Ok(PoincareEstimate {
                    lambda_min: lambda,
                    poincare_constant: 1.0 / (eps * eps * lambda),
                    iterations: it,
                    inner_iterations: inner_total,
                });
            }
            delta_prev = delta;
        }
        lambda_prev = lambda;
    }
    Err(Error::NonConvergence(Box::new(crate::stokes::SolveStats {
        iterations: cfg.max_iterations,
        inner_iterations: inner_total,
        ..Default::default()
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn unit_square_first_eigenvalue() {
        let g = MacGrid::unit(2, 64, 1, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let e = smallest_poincare_eigenvalue(&g, &m, &EigenConfig::default()).unwrap();
        let exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((e.lambda_min - exact).abs() < 0.5, "{}", e.lambda_min);
        // discrete eigenvalue of the cell-centered stencil with ghost walls
        // is not the textbook one, but must be close to second order
        assert!((e.lambda_min - exact).abs() < 0.05);
    }

    #[test]
    fn periodic_without_holes_is_singular() {
        let g = MacGrid::periodic_cell(2, 8).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        assert!(smallest_poincare_eigenvalue(&g, &m, &EigenConfig::default()).is_err());
    }
}
