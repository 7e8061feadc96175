//! Cell-centered finite volumes for `div(A (f - grad p0)) = 0` with no normal
//! flux on the box boundary.
//!
//! The operator is the gradient of the discrete energy
//! `1/2 sum_faces A_aa (D_a p)^2 + sum_corners A_ab (d_a p)(d_b p)`, where the
//! cross terms use the 2x2 cell block around each interior corner. It is
//! symmetric with the constants as kernel.

use serde::Serialize;

use super::force::ForceField;
use crate::error::{Error, Result};
use crate::grid::{Boundary, MacGrid, PressureField, VelocityField};
use crate::linalg::{self, conjugate_gradient};
use crate::stokes::SolverConfig;

#[derive(Clone, Debug)]
pub struct DarcySolution {
    pub grid: MacGrid,
    pub a: [[f64; 3]; 3],
    /// Zero-mean macroscopic pressure at the cell centers.
    pub p0: PressureField,
    /// `A (f - grad p0)` at the faces; zero on the boundary faces.
    pub u_star: VelocityField,
    /// Cell-centered `grad p0`.
    pub grad_p0: Vec<[f64; 3]>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DarcySummary {
    pub iterations: usize,
    pub residual: f64,
    pub max_grad_p0: f64,
}

struct Operator<'g> {
    grid: &'g MacGrid,
    a: [[f64; 3]; 3],
}

impl Operator<'_> {
    fn neighbor(&self, c: usize, b: usize) -> Option<usize> {
        let i = self.grid.cell_multi(c);
        if i[b] + 1 >= self.grid.cells[b] {
            return None;
        }
        let mut j = i;
        j[b] += 1;
        Some(self.grid.cell_linear(j))
    }

    fn apply(&self, p: &[f64], out: &mut [f64]) {
        let g = self.grid;
        let dim = g.dim;
        let h2 = g.h * g.h;
        out.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..p.len() {
            for a in 0..dim {
                if let Some(r) = self.neighbor(c, a) {
                    let flux = self.a[a][a] * (p[r] - p[c]) / h2;
                    out[c] -= flux;
                    out[r] += flux;
                }
                for b in (a + 1)..dim {
                    let ab = self.a[a][b];
                    if ab == 0.0 {
                        continue;
                    }
                    let (Some(c10), Some(c01)) = (self.neighbor(c, a), self.neighbor(c, b)) else {
                        continue;
                    };
                    let c11 = self.neighbor(c10, b).expect("block inside the box");
                    let da = 0.5 * (p[c10] + p[c11] - p[c] - p[c01]);
                    let db = 0.5 * (p[c01] + p[c11] - p[c] - p[c10]);
                    // d/dp of ab * da * db, scaled by 1/h^2
                    let w = ab / h2;
                    out[c] += w * (-0.5 * db - 0.5 * da);
                    out[c10] += w * (0.5 * db - 0.5 * da);
                    out[c01] += w * (-0.5 * db + 0.5 * da);
                    out[c11] += w * (0.5 * db + 0.5 * da);
                }
            }
        }
    }
}

fn check_tensor(a: &[[f64; 3]; 3], dim: usize) -> Result<()> {
    let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| a[i][j]);
    for i in 0..dim {
        for j in 0..dim {
            if (a[i][j] - a[j][i]).abs() > 1e-12 * a[i][i].abs().max(a[j][j].abs()) {
                return Err(Error::SingularSystem(
                    "permeability tensor is not symmetric".into(),
                ));
            }
        }
    }
    let min = m
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |x, v| x.min(*v));
    if !(min > 0.0) {
        return Err(Error::SingularSystem(
            "permeability tensor is not positive definite".into(),
        ));
    }
    Ok(())
}

/// Cell-centered central differences, one-sided at the box edges.
fn cell_gradient(grid: &MacGrid, p: &[f64]) -> Vec<[f64; 3]> {
    let h = grid.h;
    (0..p.len())
        .map(|c| {
            let i = grid.cell_multi(c);
            let mut g = [0.0; 3];
            for b in 0..grid.dim {
                let n = grid.cells[b];
                if n < 2 {
                    continue;
                }
                let at = |k: usize| {
                    let mut j = i;
                    j[b] = k;
                    p[grid.cell_linear(j)]
                };
                g[b] = if i[b] == 0 {
                    (at(1) - at(0)) / h
                } else if i[b] == n - 1 {
                    (at(n - 1) - at(n - 2)) / h
                } else {
                    (at(i[b] + 1) - at(i[b] - 1)) / (2.0 * h)
                };
            }
            g
        })
        .collect()
}

/// Solve the Darcy problem on the cells of `grid` (holes are ignored).
pub fn solve_darcy(
    a: [[f64; 3]; 3],
    force: &ForceField,
    grid: &MacGrid,
    cfg: &SolverConfig,
) -> Result<DarcySolution> {
    cfg.validate()?;
    let dim = grid.dim;
    force.validate(dim)?;
    check_tensor(&a, dim)?;
    if grid.boundary != Boundary::DirichletBox {
        return Err(Error::InvalidGrid(
            "the Darcy problem needs a bounded box".into(),
        ));
    }
    let op = Operator { grid, a };
    let nc = grid.cell_count();
    let h = grid.h;

    // b_c = sum over interior faces of (A f)_a (+-1/h)
    let mut b = vec![0.0; nc];
    let mut flux_scale: f64 = 0.0;
    for c in 0..nc {
        let i = grid.cell_multi(c);
        for ax in 0..dim {
            let Some(r) = op.neighbor(c, ax) else {
                continue;
            };
            let mut fi = i;
            fi[ax] += 1;
            let x = grid.face_center(ax, fi);
            let mut flux = 0.0;
            for bx in 0..dim {
                let fb = if bx == ax {
                    force.face_average(dim, ax, &x, h)
                } else {
                    force.derivative(dim, bx, [0; 3], &x)
                };
                flux += a[ax][bx] * fb;
            }
            b[c] -= flux / h;
            b[r] += flux / h;
            flux_scale = flux_scale.max(flux.abs() / h);
        }
    }
    linalg::remove_mean(&mut b);
    let mut p = vec![0.0; nc];
    let bnorm = linalg::norm(&b);
    // fluxes that cancel to rounding leave nothing to solve for
    let (iterations, residual) = if bnorm > 1e-13 * flux_scale * (nc as f64).sqrt() {
        let out = conjugate_gradient(
            |v: &[f64], o: &mut [f64]| op.apply(v, o),
            &b,
            &mut p,
            cfg.rtol,
            0.0,
            cfg.max_iterations.max(20 * nc),
            Some(linalg::remove_mean),
        );
        if !out.converged {
            return Err(Error::NonConvergence(Box::new(crate::stokes::SolveStats {
                iterations: out.iterations,
                momentum_residual: out.residual / bnorm,
                ..Default::default()
            })));
        }
        (out.iterations, out.residual / bnorm)
    } else {
        (0, 0.0)
    };
    linalg::remove_mean(&mut p);
    let grad_p0 = cell_gradient(grid, &p);

    let mut u_star = VelocityField::zeros(grid);
    for ax in 0..dim {
        let dims = grid.face_dims(ax);
        for (f, v) in u_star.comps[ax].iter_mut().enumerate() {
            let i = grid.face_multi(ax, f);
            if i[ax] == 0 || i[ax] + 1 == dims[ax] {
                continue;
            }
            let mut lo = i;
            lo[ax] -= 1;
            let (cl, cr) = (grid.cell_linear(lo), grid.cell_linear(i));
            let x = grid.face_center(ax, i);
            let fv = force.value(dim, &x);
            let mut s = 0.0;
            for bx in 0..dim {
                let dp = if bx == ax {
                    (p[cr] - p[cl]) / h
                } else {
                    0.5 * (grad_p0[cl][bx] + grad_p0[cr][bx])
                };
                s += a[ax][bx] * (fv[bx] - dp);
            }
            *v = s;
        }
    }
    Ok(DarcySolution {
        grid: grid.clone(),
        a,
        p0: PressureField { values: p },
        u_star,
        grad_p0,
        iterations,
        residual,
    })
}

impl DarcySolution {
    /// Multilinear interpolation of cell-centered data, clamped to the
    /// outermost cell centers.
    fn interpolate<F: Fn(usize) -> f64>(&self, x: &[f64; 3], value: F) -> f64 {
        let g = &self.grid;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..g.dim {
            let s = x[a] / g.h - g.offset[a] as f64 - 0.5;
            let n = g.cells[a];
            if n == 1 {
                continue;
            }
            let s = s.clamp(0.0, (n - 1) as f64);
            let i0 = (s.floor() as usize).min(n - 2);
            base[a] = i0;
            frac[a] = s - i0 as f64;
        }
        let corners = 1usize << g.dim;
        let mut acc = 0.0;
        for mask in 0..corners {
            let mut i = base;
            let mut w = 1.0;
            for a in 0..g.dim {
                if g.cells[a] == 1 {
                    continue;
                }
                if mask >> a & 1 == 1 {
                    i[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                acc += w * value(g.cell_linear(i));
            }
        }
        acc
    }

    pub fn p0_at(&self, x: &[f64; 3]) -> f64 {
        self.interpolate(x, |c| self.p0.values[c])
    }

    pub fn grad_p0_at(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (b, v) in g.iter_mut().enumerate().take(self.grid.dim) {
            *v = self.interpolate(x, |c| self.grad_p0[c][b]);
        }
        g
    }

    pub fn max_grad_p0(&self) -> f64 {
        self.grad_p0
            .iter()
            .flat_map(|g| g.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn summary(&self) -> DarcySummary {
        DarcySummary {
            iterations: self.iterations,
            residual: self.residual,
            max_grad_p0: self.max_grad_p0(),
        }
    }
}

/// Pad a `d x d` tensor into the fixed 3x3 layout.
pub fn tensor3(a: &[Vec<f64>]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[i][j] = *v;
        }
    }
    out
}
