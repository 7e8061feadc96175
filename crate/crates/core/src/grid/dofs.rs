//! Compact numbering of fluid unknowns and the matrix-free MAC stencils.
//!
//! Velocity unknowns are the fluid faces, stacked component by component.
//! Pressure unknowns are the fluid cells. The Laplacian row of a face keeps
//! its fluid neighbors explicitly; every other neighbor contributes to the
//! diagonal: a solid face holds the value 0 one step away, and a tangential
//! Dirichlet wall lies half a step away, handled with the reflected ghost
//! value `-u`. The discrete gradient is exactly minus the transpose of the
//! discrete divergence.

use rayon::prelude::*;

use super::mask::{cell_faces, face_cells, FluidMask};
use super::{MacGrid, PressureField, VelocityField};
use crate::error::Result;
use crate::linalg;

pub const NONE: u32 = u32::MAX;

const ROWS_PER_TASK: usize = 4096;

#[derive(Clone, Debug)]
pub struct ComponentDofs {
    pub face_to_dof: Vec<u32>,
    pub dof_to_face: Vec<u32>,
    /// Diagonal of `h^2 (-Delta_h)`.
    pub diag: Vec<f64>,
    /// Fluid neighbors (component-local dof numbers), padded with `NONE`.
    pub nbr: Vec<[u32; 6]>,
    /// The component Laplacian is singular (periodic box, no solid faces).
    pub has_kernel: bool,
}

#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: MacGrid,
    pub vel: Vec<ComponentDofs>,
    /// Start of each component in the stacked velocity vector.
    pub vel_offset: Vec<usize>,
    pub cell_to_dof: Vec<u32>,
    pub dof_to_cell: Vec<u32>,
    /// Low-side and high-side pressure dof of every velocity dof.
    pub grad: Vec<[u32; 2]>,
    /// For each pressure dof: (stacked velocity dof, +1 or -1), padded with `NONE`.
    pub div: Vec<[(u32, f64); 6]>,
}

/// Neighbor of multi-index `i` in the array of shape `dims` along axis `b`;
/// `None` past a non-periodic edge.
#[inline]
fn shift(
    i: [usize; 3],
    dims: [usize; 3],
    b: usize,
    up: bool,
    periodic: bool,
) -> Option<[usize; 3]> {
    let mut j = i;
    if up {
        if i[b] + 1 < dims[b] {
            j[b] += 1;
        } else if periodic {
            j[b] = 0;
        } else {
            return None;
        }
    } else if i[b] > 0 {
        j[b] -= 1;
    } else if periodic {
        j[b] = dims[b] - 1;
    } else {
        return None;
    }
    Some(j)
}

impl Discretization {
    pub fn new(grid: &MacGrid, mask: &FluidMask) -> Result<Self> {
        mask.check(grid)?;
        let dim = grid.dim;
        let periodic = grid.is_periodic();
        let mut vel = Vec::with_capacity(dim);
        let mut vel_offset = vec![0usize];
        for a in 0..dim {
            let flags = &mask.faces[a];
            let mut face_to_dof = vec![NONE; flags.len()];
            let mut dof_to_face = Vec::new();
            for (f, fl) in flags.iter().enumerate() {
                if *fl {
                    face_to_dof[f] = dof_to_face.len() as u32;
                    dof_to_face.push(f as u32);
                }
            }
            let dims = grid.face_dims(a);
            let rows: Vec<(f64, [u32; 6])> = dof_to_face
                .par_iter()
                .map(|&f| {
                    let i = grid.face_multi(a, f as usize);
                    let mut diag = 0.0;
                    let mut nb = [NONE; 6];
                    let mut slot = 0;
                    for b in 0..dim {
                        for up in [false, true] {
                            match shift(i, dims, b, up, periodic) {
                                None => diag += 2.0,
                                Some(j) => {
                                    let d = face_to_dof[grid.face_linear(a, j)];
                                    diag += 1.0;
                                    if d != NONE {
                                        nb[slot] = d;
                                        slot += 1;
                                    }
                                }
                            }
                        }
                    }
                    (diag, nb)
                })
                .collect();
            let has_kernel = periodic && dof_to_face.len() == flags.len();
            let (diag, nbr) = rows.into_iter().unzip();
            vel_offset.push(vel_offset[a] + dof_to_face.len());
            vel.push(ComponentDofs {
                face_to_dof,
                dof_to_face,
                diag,
                nbr,
                has_kernel,
            });
        }
        let mut cell_to_dof = vec![NONE; mask.cells.len()];
        let mut dof_to_cell = Vec::new();
        for (c, fl) in mask.cells.iter().enumerate() {
            if *fl {
                cell_to_dof[c] = dof_to_cell.len() as u32;
                dof_to_cell.push(c as u32);
            }
        }
        let mut grad = Vec::with_capacity(vel_offset[dim]);
        for a in 0..dim {
            for &f in &vel[a].dof_to_face {
                let (lo, hi) = face_cells(grid, a, grid.face_multi(a, f as usize))
                    .expect("fluid faces are interior");
                let (pl, ph) = (cell_to_dof[lo], cell_to_dof[hi]);
                debug_assert!(pl != NONE && ph != NONE);
                grad.push([pl, ph]);
            }
        }
        let div = dof_to_cell
            .par_iter()
            .map(|&c| {
                let mut row = [(NONE, 0.0); 6];
                let mut slot = 0;
                for a in 0..dim {
                    let (lo, hi) = cell_faces(grid, a, c as usize);
                    for (face, sign) in [(lo, -1.0), (hi, 1.0)] {
                        let d = vel[a].face_to_dof[face];
                        if d != NONE {
                            row[slot] = (vel_offset[a] as u32 + d, sign);
                            slot += 1;
                        }
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            vel,
            vel_offset,
            cell_to_dof,
            dof_to_cell,
            grad,
            div,
        })
    }

    pub fn n_vel(&self) -> usize {
        *self.vel_offset.last().unwrap()
    }

    pub fn n_p(&self) -> usize {
        self.dof_to_cell.len()
    }

    pub fn has_velocity_kernel(&self) -> bool {
        self.vel.iter().any(|c| c.has_kernel)
    }

    /// `out = -Delta_h u` on the stacked velocity vector.
    pub fn apply_laplacian(&self, u: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.grid.h * self.grid.h);
        for (a, comp) in self.vel.iter().enumerate() {
            let r = self.vel_offset[a]..self.vel_offset[a + 1];
            let ua = &u[r.clone()];
            out[r]
                .par_chunks_mut(ROWS_PER_TASK)
                .enumerate()
                .for_each(|(t, chunk)| {
                    let base = t * ROWS_PER_TASK;
                    for (k, o) in chunk.iter_mut().enumerate() {
                        let row = base + k;
                        let mut s = comp.diag[row] * ua[row];
                        for &nb in &comp.nbr[row] {
                            if nb == NONE {
                                break;
                            }
                            s -= ua[nb as usize];
                        }
                        *o = s * inv_h2;
                    }
                });
        }
    }

    /// `out = grad_h p` on velocity dofs.
    pub fn apply_grad(&self, p: &[f64], out: &mut [f64]) {
        let inv_h = 1.0 / self.grid.h;
        out.par_chunks_mut(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(t, chunk)| {
                let base = t * ROWS_PER_TASK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    let [l, r] = self.grad[base + k];
                    *o = (p[r as usize] - p[l as usize]) * inv_h;
                }
            });
    }

    /// `out = div_h u` on pressure dofs.
    pub fn apply_div(&self, u: &[f64], out: &mut [f64]) {
        let inv_h = 1.0 / self.grid.h;
        out.par_chunks_mut(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(t, chunk)| {
                let base = t * ROWS_PER_TASK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for &(d, sign) in &self.div[base + k] {
                        if d == NONE {
                            break;
                        }
                        s += sign * u[d as usize];
                    }
                    *o = s * inv_h;
                }
            });
    }

    /// Remove the mean of every component whose Laplacian has a kernel.
    pub fn project_velocity(&self, u: &mut [f64]) {
        for (a, comp) in self.vel.iter().enumerate() {
            if comp.has_kernel {
                linalg::remove_mean(&mut u[self.vel_offset[a]..self.vel_offset[a + 1]]);
            }
        }
    }

    pub fn gather_velocity(&self, v: &VelocityField) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_vel());
        for (a, comp) in self.vel.iter().enumerate() {
            out.extend(comp.dof_to_face.iter().map(|&f| v.comps[a][f as usize]));
        }
        out
    }

    /// Field with the dof values on fluid faces and zero elsewhere.
    pub fn scatter_velocity(&self, u: &[f64]) -> VelocityField {
        let mut v = VelocityField::zeros(&self.grid);
        for (a, comp) in self.vel.iter().enumerate() {
            for (d, &f) in comp.dof_to_face.iter().enumerate() {
                v.comps[a][f as usize] = u[self.vel_offset[a] + d];
            }
        }
        v
    }

    pub fn gather_pressure(&self, p: &PressureField) -> Vec<f64> {
        self.dof_to_cell
            .iter()
            .map(|&c| p.values[c as usize])
            .collect()
    }

    pub fn scatter_pressure(&self, p: &[f64]) -> PressureField {
        let mut out = PressureField::zeros(&self.grid);
        for (d, &c) in self.dof_to_cell.iter().enumerate() {
            out.values[c as usize] = p[d];
        }
        out
    }
}

/// Cell-centered `-Delta_h` with zero Dirichlet data on solid cells and on
/// the walls of a Dirichlet box.
#[derive(Clone, Debug)]
pub struct CellLaplacian {
    pub h: f64,
    pub cell_to_dof: Vec<u32>,
    pub dof_to_cell: Vec<u32>,
    pub diag: Vec<f64>,
    pub nbr: Vec<[u32; 6]>,
    pub has_kernel: bool,
}

impl CellLaplacian {
    pub fn new(grid: &MacGrid, mask: &FluidMask) -> Result<Self> {
        mask.check(grid)?;
        let periodic = grid.is_periodic();
        let mut cell_to_dof = vec![NONE; mask.cells.len()];
        let mut dof_to_cell = Vec::new();
        for (c, fl) in mask.cells.iter().enumerate() {
            if *fl {
                cell_to_dof[c] = dof_to_cell.len() as u32;
                dof_to_cell.push(c as u32);
            }
        }
        let rows: Vec<(f64, [u32; 6])> = dof_to_cell
            .par_iter()
            .map(|&c| {
                let i = grid.cell_multi(c as usize);
                let mut diag = 0.0;
                let mut nb = [NONE; 6];
                let mut slot = 0;
                for b in 0..grid.dim {
                    for up in [false, true] {
                        match shift(i, grid.cells, b, up, periodic) {
                            None => diag += 2.0,
                            Some(j) => {
                                diag += 1.0;
                                let d = cell_to_dof[grid.cell_linear(j)];
                                if d != NONE {
                                    nb[slot] = d;
                                    slot += 1;
                                }
                            }
                        }
                    }
                }
                (diag, nb)
            })
            .collect();
        let has_kernel = periodic && dof_to_cell.len() == mask.cells.len();
        let (diag, nbr) = rows.into_iter().unzip();
        Ok(Self {
            h: grid.h,
            cell_to_dof,
            dof_to_cell,
            diag,
            nbr,
            has_kernel,
        })
    }

    pub fn len(&self) -> usize {
        self.dof_to_cell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dof_to_cell.is_empty()
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let inv_h2 = 1.0 / (self.h * self.h);
        out.par_chunks_mut(ROWS_PER_TASK)
            .enumerate()
            .for_each(|(t, chunk)| {
                let base = t * ROWS_PER_TASK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    let row = base + k;
                    let mut s = self.diag[row] * u[row];
                    for &nb in &self.nbr[row] {
                        if nb == NONE {
                            break;
                        }
                        s -= u[nb as usize];
                    }
                    *o = s * inv_h2;
                }
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CellShape, PerforationLattice};
    use crate::grid::{rasterize, Boundary};

    fn disk_setup(boundary: Boundary) -> (MacGrid, FluidMask) {
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let g = MacGrid::unit(2, 8, 2, boundary).unwrap();
        let m = rasterize(&l, &g).unwrap();
        (g, m)
    }

    #[test]
    fn gradient_is_minus_divergence_transpose() {
        for bc in [Boundary::DirichletBox, Boundary::PeriodicBox] {
            let (g, m) = disk_setup(bc);
            let d = Discretization::new(&g, &m).unwrap();
            let (nv, np) = (d.n_vel(), d.n_p());
            for j in (0..np).step_by(7) {
                let mut e = vec![0.0; np];
                e[j] = 1.0;
                let mut ge = vec![0.0; nv];
                d.apply_grad(&e, &mut ge);
                for i in (0..nv).step_by(5) {
                    let mut ei = vec![0.0; nv];
                    ei[i] = 1.0;
                    let mut de = vec![0.0; np];
                    d.apply_div(&ei, &mut de);
                    assert_eq!(ge[i], -de[j]);
                }
            }
        }
    }

    #[test]
    fn laplacian_is_symmetric() {
        let (g, m) = disk_setup(Boundary::DirichletBox);
        let d = Discretization::new(&g, &m).unwrap();
        let nv = d.n_vel();
        let col = |j: usize| {
            let mut e = vec![0.0; nv];
            e[j] = 1.0;
            let mut out = vec![0.0; nv];
            d.apply_laplacian(&e, &mut out);
            out
        };
        for j in (0..nv).step_by(11) {
            let cj = col(j);
            for i in (0..nv).step_by(13) {
                assert_eq!(cj[i], col(i)[j]);
            }
        }
    }

    #[test]
    fn periodic_unperforated_has_kernel() {
        let g = MacGrid::periodic_cell(2, 8).unwrap();
        let m = crate::grid::FluidMask::unperforated(&g).unwrap();
        let d = Discretization::new(&g, &m).unwrap();
        assert!(d.vel.iter().all(|c| c.has_kernel));
        let (g, m) = disk_setup(Boundary::PeriodicBox);
        let d = Discretization::new(&g, &m).unwrap();
        assert!(!d.has_velocity_kernel());
    }
}
