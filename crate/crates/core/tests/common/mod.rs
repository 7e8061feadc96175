//! Checks shared by the oracle tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use porous_homog::experiments::fit_loglog_slope;
use porous_homog::geometry::{CellShape, PerforationLattice};
use porous_homog::grid::norms::velocity_norm;
use porous_homog::grid::{
    ops, rasterize, Boundary, Discretization, FluidMask, MacGrid, NormKind, PressureField,
    VelocityField,
};
use porous_homog::stokes::{
    divergence_lift, smallest_poincare_eigenvalue, solve_stokes, EigenConfig, SolverConfig,
    StokesProblem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk_box(n: usize, m: usize) -> (MacGrid, FluidMask) {
    let lattice = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
    let grid = MacGrid::unit(2, n, m, Boundary::DirichletBox).unwrap();
    let mask = rasterize(&lattice, &grid).unwrap();
    (grid, mask)
}

/// Fluid faces of both components, as (component, face index).
fn face_unknowns(grid: &MacGrid, mask: &FluidMask) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..2 {
        for (f, fl) in mask.faces[a].iter().enumerate() {
            if *fl {
                out.push((a, f));
            }
        }
    }
    assert!(!out.is_empty() && grid.dim == 2);
    out
}

/// Dense `-h^2 Delta` on the fluid faces: solid neighbours count as zero one
/// step away, tangential walls as the reflected ghost half a step away.
fn dense_vector_laplacian(grid: &MacGrid, faces: &[(usize, usize)]) -> DMatrix<f64> {
    let mut index = std::collections::HashMap::new();
    for (k, f) in faces.iter().enumerate() {
        index.insert(*f, k);
    }
    let nv = faces.len();
    let mut l = DMatrix::zeros(nv, nv);
    for (row, &(a, f)) in faces.iter().enumerate() {
        let d = grid.face_dims(a);
        let i = grid.face_multi(a, f);
        for b in 0..2 {
            for s in [-1i64, 1] {
                let v = i[b] as i64 + s;
                if v < 0 || v >= d[b] as i64 {
                    assert_ne!(a, b, "normal neighbours of a fluid face lie in the box");
                    l[(row, row)] += 2.0;
                    continue;
                }
                let mut j = i;
                j[b] = v as usize;
                let g = grid.face_linear(a, j);
                l[(row, row)] += 1.0;
                if let Some(&col) = index.get(&(a, g)) {
                    l[(row, col)] -= 1.0;
                }
            }
        }
    }
    l
}

/// Dense `h div` from fluid faces to fluid cells.
fn dense_divergence(grid: &MacGrid, faces: &[(usize, usize)], cells: &[usize]) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(cells.len(), faces.len());
    for (r, &c) in cells.iter().enumerate() {
        let i = grid.cell_multi(c);
        for (col, &(a, f)) in faces.iter().enumerate() {
            let fi = grid.face_multi(a, f);
            let same_other = (0..2).filter(|&b| b != a).all(|b| fi[b] == i[b]);
            if !same_other {
                continue;
            }
            if fi[a] == i[a] {
                d[(r, col)] -= 1.0;
            } else if fi[a] == i[a] + 1 {
                d[(r, col)] += 1.0;
            }
        }
    }
    d
}

/// Relative max deviation of `divergence_lift` on a 16x16 perforated box
/// from the dense KKT solution.
pub fn lift_oracle_deviation() -> f64 {
    let (grid, mask) = disk_box(8, 2);
    assert_eq!(&grid.cells[..2], &[16, 16]);
    let faces = face_unknowns(&grid, &mask);
    let cells: Vec<usize> = (0..mask.cells.len()).filter(|&c| mask.cells[c]).collect();
    let mut g = PressureField::from_fn(&grid, |x| (3.0 * x[0]).sin() + x[1] * x[1]);
    let mean = g.fluid_mean(&mask);
    for (v, fl) in g.values.iter_mut().zip(&mask.cells) {
        *v = if *fl { *v - mean } else { 0.0 };
    }

    let lift = divergence_lift(&grid, &mask, &g, &SolverConfig::with_rtol(1e-12)).unwrap();

    // minimize 1/2 v.Lv subject to D v = h g, with a bordered row fixing
    // the multiplier's free constant
    let nv = faces.len();
    let nc = cells.len();
    let l = dense_vector_laplacian(&grid, &faces);
    let d = dense_divergence(&grid, &faces, &cells);
    let n = nv + nc + 1;
    let mut k = DMatrix::zeros(n, n);
    k.view_mut((0, 0), (nv, nv)).copy_from(&l);
    k.view_mut((0, nv), (nv, nc)).copy_from(&d.transpose());
    k.view_mut((nv, 0), (nc, nv)).copy_from(&d);
    for r in 0..nc {
        k[(nv + r, n - 1)] = 1.0;
        k[(n - 1, nv + r)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    for (r, &c) in cells.iter().enumerate() {
        rhs[nv + r] = grid.h * g.values[c];
    }
    let sol = k.lu().solve(&rhs).expect("KKT system is nonsingular");

    let scale = (0..nv).map(|r| sol[r].abs()).fold(0.0, f64::max);
    assert!(scale > 0.0);
    let mut err: f64 = 0.0;
    for (r, &(a, f)) in faces.iter().enumerate() {
        err = err.max((lift.velocity.comps[a][f] - sol[r]).abs());
    }
    // nothing outside the fluid faces
    for a in 0..2 {
        for (f, fl) in mask.faces[a].iter().enumerate() {
            if !fl {
                assert_eq!(lift.velocity.comps[a][f], 0.0);
            }
        }
    }
    err / scale
}

/// Relative deviation of the inverse-iteration eigenvalue on a 32x32
/// perforated box from the dense symmetric eigensolver.
pub fn eigen_oracle_deviation() -> f64 {
    let (grid, mask) = disk_box(8, 4);
    assert_eq!(&grid.cells[..2], &[32, 32]);
    let cells: Vec<usize> = (0..mask.cells.len()).filter(|&c| mask.cells[c]).collect();
    let mut index = vec![usize::MAX; mask.cells.len()];
    for (k, &c) in cells.iter().enumerate() {
        index[c] = k;
    }
    let h2 = grid.h * grid.h;
    let mut a = DMatrix::<f64>::zeros(cells.len(), cells.len());
    for (r, &c) in cells.iter().enumerate() {
        let i = grid.cell_multi(c);
        for b in 0..2 {
            for s in [-1i64, 1] {
                let v = i[b] as i64 + s;
                if v < 0 || v >= grid.cells[b] as i64 {
                    a[(r, r)] += 2.0 / h2;
                    continue;
                }
                let mut j = i;
                j[b] = v as usize;
                a[(r, r)] += 1.0 / h2;
                let col = index[grid.cell_linear(j)];
                if col != usize::MAX {
                    a[(r, col)] -= 1.0 / h2;
                }
            }
        }
    }
    let exact = SymmetricEigen::new(a).eigenvalues.min();
    let cfg = EigenConfig {
        tol: 1e-10,
        ..EigenConfig::default()
    };
    let est = smallest_poincare_eigenvalue(&grid, &mask, &cfg).unwrap();
    (est.lambda_min - exact).abs() / exact
}

fn exact_u(x: &[f64; 3]) -> [f64; 3] {
    let (a, b) = (2.0 * PI * x[0], 2.0 * PI * x[1]);
    [a.sin() * b.cos(), -a.cos() * b.sin(), 0.0]
}

// -Delta u + grad p with p = cos(2 pi x) sin(4 pi y)
fn forcing(x: &[f64; 3]) -> [f64; 3] {
    let u = exact_u(x);
    let k = 8.0 * PI * PI;
    let gx = -2.0 * PI * (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).sin();
    let gy = 4.0 * PI * (2.0 * PI * x[0]).cos() * (4.0 * PI * x[1]).cos();
    [k * u[0] + gx, k * u[1] + gy, 0.0]
}

fn velocity_error(n: usize) -> f64 {
    let grid = MacGrid::periodic_cell(2, n).unwrap();
    let mask = FluidMask::unperforated(&grid).unwrap();
    let f = VelocityField::from_fn(&grid, forcing);
    let prob = StokesProblem::new(grid.clone(), mask.clone(), f).unwrap();
    let sol = solve_stokes(&prob, &SolverConfig::with_rtol(1e-11)).unwrap();
    let mut err = VelocityField::from_fn(&grid, exact_u);
    err.add_scaled(-1.0, &sol.velocity);
    // velocity is fixed only up to a constant on the periodic box
    for c in err.comps.iter_mut() {
        let m = c.iter().sum::<f64>() / c.len() as f64;
        c.iter_mut().for_each(|v| *v -= m);
    }
    velocity_norm(&grid, &mask, &err, NormKind::L2, 0.0).unwrap()
}

/// Observed L2 order of the periodic manufactured solution over n = 16, 32, 64.
pub fn manufactured_order() -> f64 {
    let pts: Vec<(f64, f64)> = [16usize, 32, 64]
        .iter()
        .map(|&n| (1.0 / n as f64, velocity_error(n)))
        .collect();
    fit_loglog_slope(&pts).unwrap().slope
}

/// `|<grad p, u> + <p, div u>| / |<grad p, u>|` on random fields.
pub fn duality_defect() -> f64 {
    let (grid, mask) = disk_box(8, 2);
    let d = Discretization::new(&grid, &mask).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = PressureField::from_fn(&grid, |_| rng.gen_range(-1.0..1.0));
    let u = VelocityField::from_fn(&grid, |_| {
        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0]
    });
    let lhs = ops::inner_velocity(&d, &ops::grad(&d, &p).unwrap(), &u);
    let rhs = -ops::inner_pressure(&d, &p, &ops::div(&d, &u).unwrap());
    (lhs - rhs).abs() / lhs.abs()
}

/// `|<f, u> - |grad u|^2| / <f, u>` for a Stokes solution in a perforated box.
pub fn energy_identity_defect() -> f64 {
    let (grid, mask) = disk_box(8, 2);
    let f = VelocityField::from_fn(&grid, |x| [(6.0 * x[1]).sin() + 0.3, x[0] * x[1], 0.0]);
    let prob = StokesProblem::new(grid.clone(), mask.clone(), f.clone()).unwrap();
    let sol = solve_stokes(&prob, &SolverConfig::with_rtol(1e-10)).unwrap();
    let d = Discretization::new(&grid, &mask).unwrap();
    let energy = velocity_norm(&grid, &mask, &sol.velocity, NormKind::H1Semi, 0.0)
        .unwrap()
        .powi(2);
    let work = ops::inner_velocity(&d, &f, &sol.velocity);
    (energy - work).abs() / work
}
