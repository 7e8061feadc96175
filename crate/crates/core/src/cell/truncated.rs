//! Correctors of a locally perturbed lattice on a finite box of cells.
//!
//! The unknown is split as `w = w^per + w~`. With `w0` the periodic corrector
//! with its values on newly solid faces set to zero, `w~ = w - w0` solves a
//! Stokes problem with homogeneous Dirichlet data on the box and the holes,
//! forced by the residual of `w0` in the infinite-lattice stencil.

use serde::Serialize;

use super::PeriodicCorrectors;
use crate::error::{Error, Result};
use crate::geometry::PerforationLattice;
use crate::grid::mask::face_cells;
use crate::grid::norms::{pressure_norm, velocity_norm};
use crate::grid::{
    rasterize, Discretization, FluidMask, MacGrid, NormKind, PressureField, VelocityField,
};
use crate::stokes::{SaddleSolver, SolveStats, SolverConfig};

#[derive(Clone, Debug)]
pub struct TruncatedCorrector {
    pub j: usize,
    pub grid: MacGrid,
    pub mask: FluidMask,
    pub w: VelocityField,
    pub p: PressureField,
    /// `w - w^per` on every face of the box.
    pub w_tilde: VelocityField,
    /// `p - p^per` on the fluid cells.
    pub p_tilde: PressureField,
    /// `None` when the lattice is unperturbed inside the box and the solve
    /// was skipped.
    pub stats: Option<SolveStats>,
}

impl TruncatedCorrector {
    /// `||w~||_{H^1}` over the box.
    pub fn tilde_h1(&self) -> Result<f64> {
        let l2 = velocity_norm(&self.grid, &self.mask, &self.w_tilde, NormKind::L2, 0.0)?;
        let h1 = velocity_norm(&self.grid, &self.mask, &self.w_tilde, NormKind::H1Semi, 0.0)?;
        Ok((l2 * l2 + h1 * h1).sqrt())
    }

    /// Share of `||grad w~||^2` carried by the faces in lattice cells within
    /// `radius` (max norm) of cell `k`.
    pub fn energy_fraction_near(&self, k: [i64; 3], radius: i64) -> f64 {
        let g = &self.grid;
        let n = g.n as i64;
        let mut near = 0.0;
        let mut total = 0.0;
        for a in 0..g.dim {
            let w = &self.w_tilde.comps[a];
            let dims = g.face_dims(a);
            for f in 0..w.len() {
                let i = g.face_multi(a, f);
                for b in 0..g.dim {
                    if i[b] + 1 >= dims[b] {
                        continue;
                    }
                    let mut nb = i;
                    nb[b] += 1;
                    let d = w[f] - w[g.face_linear(a, nb)];
                    let e = d * d;
                    total += e;
                    let inside = (0..g.dim).all(|c| {
                        let gl = g.offset[c] + i[c] as i64;
                        (gl.div_euclid(n) - k[c]).abs() <= radius
                    });
                    if inside {
                        near += e;
                    }
                }
            }
        }
        if total > 0.0 {
            near / total
        } else {
            0.0
        }
    }
}

#[inline]
fn periodic_index(per: &MacGrid, a: usize, g: [i64; 3]) -> usize {
    let mut i = [0usize; 3];
    for b in 0..per.dim {
        i[b] = g[b].rem_euclid(per.cells[b] as i64) as usize;
    }
    per.face_linear(a, i)
}

/// Correctors on the Dirichlet box of cells `lo..=hi` (unit scale).
///
/// With `skip_unperturbed`, a box free of overrides returns the periodic
/// corrector restricted to the box without solving.
pub fn solve_corrector_on_box(
    lattice: &PerforationLattice,
    lo: [i64; 3],
    hi: [i64; 3],
    periodic: &PeriodicCorrectors,
    j: usize,
    cfg: &SolverConfig,
    skip_unperturbed: bool,
) -> Result<TruncatedCorrector> {
    let dim = lattice.dim;
    let per = periodic.grid();
    if per.dim != dim || j >= dim {
        return Err(Error::InconsistentGrids(
            "periodic correctors do not match the lattice".into(),
        ));
    }
    if lattice.periodic_part().base_shape != periodic.cell.shape {
        return Err(Error::InconsistentGrids(
            "periodic correctors were computed for a different base shape".into(),
        ));
    }
    for k in lattice.perturbation.overrides.keys() {
        if (0..dim).any(|a| k[a] < lo[a] || k[a] > hi[a]) {
            return Err(Error::OverridesOutsideTruncation { k: *k });
        }
    }
    let n = per.n;
    let grid = MacGrid::cell_box(dim, n, lo, hi)?;
    let mask = rasterize(lattice, &grid)?;
    let disc = Discretization::new(&grid, &mask)?;
    let wp = &periodic.w[j];
    let pp = &periodic.p[j];

    // periodic fields on the box
    let mut w_per = VelocityField::zeros(&grid);
    for a in 0..dim {
        for (f, v) in w_per.comps[a].iter_mut().enumerate() {
            let i = grid.face_multi(a, f);
            let mut gl = [0i64; 3];
            for b in 0..dim {
                gl[b] = grid.offset[b] + i[b] as i64;
            }
            *v = wp.comps[a][periodic_index(per, a, gl)];
        }
    }
    let mut p_per = PressureField::zeros(&grid);
    for (c, v) in p_per.values.iter_mut().enumerate() {
        let i = grid.cell_multi(c);
        let mut ip = [0usize; 3];
        for b in 0..dim {
            ip[b] = (grid.offset[b] + i[b] as i64).rem_euclid(n as i64) as usize;
        }
        *v = pp.values[per.cell_linear(ip)];
    }

    // w0: zero on faces that became solid, periodic data on the wall faces
    let mut w0 = w_per.clone();
    for a in 0..dim {
        for f in 0..w0.comps[a].len() {
            let i = grid.face_multi(a, f);
            let wall = face_cells(&grid, a, i).is_none();
            if !wall && !mask.faces[a][f] {
                w0.comps[a][f] = 0.0;
            }
        }
    }
    let mut p0 = p_per.clone();
    for (c, v) in p0.values.iter_mut().enumerate() {
        if !mask.cells[c] {
            *v = 0.0;
        }
    }

    let unperturbed = !lattice
        .perturbation
        .overrides
        .keys()
        .any(|k| (0..dim).all(|a| k[a] >= lo[a] && k[a] <= hi[a]));
    if skip_unperturbed && unperturbed {
        return Ok(TruncatedCorrector {
            j,
            w_tilde: VelocityField::zeros(&grid),
            p_tilde: PressureField::zeros(&grid),
            grid,
            mask,
            w: w0,
            p: p0,
            stats: None,
        });
    }

    // residual of w0 in the infinite-lattice stencil
    let h = grid.h;
    let h2 = h * h;
    let mut f = vec![0.0; disc.n_vel()];
    for a in 0..dim {
        let dims = grid.face_dims(a);
        let comp = &disc.vel[a];
        for (dof, face) in comp.dof_to_face.iter().enumerate() {
            let face = *face as usize;
            let i = grid.face_multi(a, face);
            let centre = w0.comps[a][face];
            let mut lap = 0.0;
            for b in 0..dim {
                for s in [-1i64, 1] {
                    let t = i[b] as i64 + s;
                    let nb = if t >= 0 && (t as usize) < dims[b] {
                        let mut ni = i;
                        ni[b] = t as usize;
                        w0.comps[a][grid.face_linear(a, ni)]
                    } else {
                        let mut gl = [0i64; 3];
                        for c in 0..dim {
                            gl[c] = grid.offset[c] + i[c] as i64;
                        }
                        gl[b] += s;
                        wp.comps[a][periodic_index(per, a, gl)]
                    };
                    lap += (centre - nb) / h2;
                }
            }
            let (clo, chi) = face_cells(&grid, a, i).expect("fluid faces are interior");
            let gp = (p0.values[chi] - p0.values[clo]) / h;
            let e = if a == j { 1.0 } else { 0.0 };
            f[disc.vel_offset[a] + dof] = e - lap - gp;
        }
    }
    let mut g = vec![0.0; disc.n_p()];
    for (dof, c) in disc.dof_to_cell.iter().enumerate() {
        let c = *c as usize;
        let mut dv = 0.0;
        for a in 0..dim {
            let (flo, fhi) = crate::grid::mask::cell_faces(&grid, a, c);
            dv += (w0.comps[a][fhi] - w0.comps[a][flo]) / h;
        }
        g[dof] = -dv;
    }
    let scale = w0.max_abs().max(f64::MIN_POSITIVE) / h;
    let mean = g.iter().sum::<f64>() / g.len().max(1) as f64;
    let tol = 1e-6 * scale;
    if mean.abs() > tol {
        return Err(Error::IncompatibleData { mean, tol });
    }
    let (u, pt, stats) = SaddleSolver::new(&disc).solve(&f, &g, cfg)?;

    let solved = disc.scatter_velocity(&u);
    let mut w = w0.clone();
    for a in 0..dim {
        for (wf, sf) in w.comps[a].iter_mut().zip(&solved.comps[a]) {
            *wf += sf;
        }
    }
    let mut w_tilde = w.clone();
    w_tilde.add_scaled(-1.0, &w_per);
    let pt = disc.scatter_pressure(&pt);
    let mut p = p0.clone();
    let mut p_tilde = PressureField::zeros(&grid);
    for c in 0..p.values.len() {
        if mask.cells[c] {
            p.values[c] += pt.values[c];
            p_tilde.values[c] = p.values[c] - p_per.values[c];
        }
    }
    Ok(TruncatedCorrector {
        j,
        grid,
        mask,
        w,
        p,
        w_tilde,
        p_tilde,
        stats: Some(stats),
    })
}

/// Correctors on the box of `2R+1` cells centered on cell 0.
pub fn solve_truncated_corrector(
    lattice: &PerforationLattice,
    r: usize,
    periodic: &PeriodicCorrectors,
    j: usize,
    cfg: &SolverConfig,
) -> Result<TruncatedCorrector> {
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for a in 0..lattice.dim {
        lo[a] = -(r as i64);
        hi[a] = r as i64;
    }
    solve_corrector_on_box(lattice, lo, hi, periodic, j, cfg, false)
}

/// `||coarse.w - fine.w||_{H^1}` over the box of `coarse`, using every face
/// pair inside that box (the fine box must contain it).
pub fn h1_difference_on_subbox(
    coarse: &TruncatedCorrector,
    fine: &TruncatedCorrector,
) -> Result<f64> {
    let gc = &coarse.grid;
    let gf = &fine.grid;
    if gc.n != gf.n || gc.dim != gf.dim {
        return Err(Error::InconsistentGrids(
            "correctors at different resolutions".into(),
        ));
    }
    let dim = gc.dim;
    let mut shift = [0usize; 3];
    for a in 0..dim {
        let s = gc.offset[a] - gf.offset[a];
        if s < 0 || s as usize + gc.cells[a] > gf.cells[a] {
            return Err(Error::InconsistentGrids(
                "fine box does not contain the coarse box".into(),
            ));
        }
        shift[a] = s as usize;
    }
    let vol = gc.cell_volume();
    let h2 = gc.h * gc.h;
    let mut l2 = 0.0;
    let mut semi = 0.0;
    for a in 0..dim {
        let dims = gc.face_dims(a);
        let d: Vec<f64> = (0..gc.face_count(a))
            .map(|f| {
                let i = gc.face_multi(a, f);
                let mut fi = i;
                for b in 0..dim {
                    fi[b] += shift[b];
                }
                coarse.w.comps[a][f] - fine.w.comps[a][gf.face_linear(a, fi)]
            })
            .collect();
        for (f, v) in d.iter().enumerate() {
            l2 += v * v;
            let i = gc.face_multi(a, f);
            for b in 0..dim {
                if i[b] + 1 < dims[b] {
                    let mut nb = i;
                    nb[b] += 1;
                    let e = v - d[gc.face_linear(a, nb)];
                    semi += e * e / h2;
                }
            }
        }
    }
    Ok(((l2 + semi) * vol).sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectorPressureStats {
    /// Mean of `p~` over the fluid part of the region.
    pub mean: f64,
    /// `||p~ - mean||_{L^2}` over the fluid part of the region.
    pub quotient_norm: f64,
    pub fluid_cells: usize,
}

/// Statistics of `p~` over the lattice cells `lo..=hi` of the corrector box.
pub fn corrector_pressure_stats(
    t: &TruncatedCorrector,
    lo: [i64; 3],
    hi: [i64; 3],
) -> Result<CorrectorPressureStats> {
    let g = &t.grid;
    let n = g.n as i64;
    let mut region = t.mask.clone();
    let mut count = 0;
    for (c, flag) in region.cells.iter_mut().enumerate() {
        let i = g.cell_multi(c);
        let inside = (0..g.dim).all(|a| {
            let k = (g.offset[a] + i[a] as i64).div_euclid(n);
            k >= lo[a] && k <= hi[a]
        });
        *flag = *flag && inside;
        if *flag {
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyInteriorRegion);
    }
    let mean = t.p_tilde.fluid_mean(&region);
    let quotient_norm = pressure_norm(g, &region, &t.p_tilde, NormKind::L2Quotient, 0.0)?;
    Ok(CorrectorPressureStats {
        mean,
        quotient_norm,
        fluid_cells: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CellShape, Override, PerturbationSpec};

    fn setup() -> (PerforationLattice, PeriodicCorrectors) {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        let per = PeriodicCorrectors::solve(&shape, 8, &SolverConfig::with_rtol(1e-10)).unwrap();
        (PerforationLattice::periodic(shape), per)
    }

    #[test]
    fn unperturbed_tilde_vanishes() {
        let (l, per) = setup();
        let cfg = SolverConfig::with_rtol(1e-8);
        let t = solve_truncated_corrector(&l, 1, &per, 0, &cfg).unwrap();
        assert!(
            t.tilde_h1().unwrap() <= 10.0 * cfg.rtol,
            "{}",
            t.tilde_h1().unwrap()
        );
    }

    #[test]
    fn removal_is_localized_and_rejects_outside_override() {
        let (l, per) = setup();
        let spec = PerturbationSpec::none().with([0, 0, 0], Override::Remove);
        let lp = PerforationLattice::new(l.base_shape.clone(), spec, Default::default()).unwrap();
        let t = solve_truncated_corrector(&lp, 2, &per, 0, &SolverConfig::with_rtol(1e-8)).unwrap();
        assert!(t.tilde_h1().unwrap() > 1e-3);
        assert!(t.energy_fraction_near([0, 0, 0], 1) > 0.5);
        let far = PerturbationSpec::none().with([5, 0, 0], Override::Remove);
        let lf = PerforationLattice::new(l.base_shape.clone(), far, Default::default()).unwrap();
        assert!(matches!(
            solve_truncated_corrector(&lf, 2, &per, 0, &SolverConfig::default()),
            Err(Error::OverridesOutsideTruncation { .. })
        ));
    }
}
