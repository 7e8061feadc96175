//! Staggered (MAC) grids over perforated boxes.
//!
//! Pressures live at cell centers, velocity component `a` on the faces normal
//! to axis `a`. Arrays are stored with `x` fastest. Every grid carries the
//! global integer index of its first cell so that two grids with the same
//! per-cell resolution `n` address the same lattice points with the same
//! integers: the cell `k` along an axis covers global indices `[k n, (k+1) n)`.

pub mod dofs;
pub mod io;
pub mod mask;
pub mod norms;
pub mod ops;
pub mod sample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

pub use dofs::{CellLaplacian, Discretization};
pub use mask::{rasterize, FluidMask};
pub use norms::{norm, NormKind};
pub use sample::{two_scale_sample, two_scale_sample_pressure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// No-slip walls on the box boundary.
    DirichletBox,
    /// The box is a torus.
    PeriodicBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacGrid {
    pub dim: usize,
    /// Resolution per unit cell.
    pub n: usize,
    /// `epsilon = 1 / m`.
    pub m: usize,
    pub domain: DomainSpec,
    pub boundary: Boundary,
    pub h: f64,
    /// Pressure cells per axis (1 on unused axes).
    pub cells: [usize; 3],
    /// Global index of the first cell per axis.
    pub offset: [i64; 3],
}

fn as_integer(x: f64, what: &str) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() > 1e-8 * x.abs().max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "{what} = {x} is not a whole number of grid steps"
        )));
    }
    Ok(r as i64)
}

impl MacGrid {
    pub fn new(n: usize, m: usize, domain: DomainSpec, boundary: Boundary) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidGrid("n and m must be positive".into()));
        }
        let dim = domain.dim;
        let h = 1.0 / (m * n) as f64;
        let mut cells = [1usize; 3];
        let mut offset = [0i64; 3];
        for a in 0..dim {
            let c = as_integer(domain.lengths[a] / h, "box side / h")?;
            if c < 1 {
                return Err(Error::InvalidGrid(
                    "box side shorter than one grid step".into(),
                ));
            }
            cells[a] = c as usize;
            offset[a] = as_integer(domain.origin[a] / h, "box origin / h")?;
            if boundary == Boundary::PeriodicBox && (cells[a] % n != 0 || offset[a] % n as i64 != 0)
            {
                return Err(Error::InvalidGrid(
                    "a periodic box must consist of whole epsilon-cells".into(),
                ));
            }
        }
        Ok(Self {
            dim,
            n,
            m,
            domain,
            boundary,
            h,
            cells,
            offset,
        })
    }

    /// Unit box `[0,1]^d` at scale `epsilon = 1/m`.
    pub fn unit(dim: usize, n: usize, m: usize, boundary: Boundary) -> Result<Self> {
        Self::new(n, m, DomainSpec::unit(dim, 0.0)?, boundary)
    }

    /// One periodic reference cell at unit scale.
    pub fn periodic_cell(dim: usize, n: usize) -> Result<Self> {
        Self::unit(dim, n, 1, Boundary::PeriodicBox)
    }

    /// Unit-scale Dirichlet box covering the cells `lo..=hi`.
    pub fn cell_box(dim: usize, n: usize, lo: [i64; 3], hi: [i64; 3]) -> Result<Self> {
        let origin: Vec<f64> = (0..dim).map(|a| lo[a] as f64).collect();
        let lengths: Vec<f64> = (0..dim).map(|a| (hi[a] - lo[a] + 1) as f64).collect();
        Self::new(
            n,
            1,
            DomainSpec::new(dim, &origin, &lengths, 0.0)?,
            Boundary::DirichletBox,
        )
    }

    /// Dirichlet box of the `2R+1` cells centered on cell 0.
    pub fn truncated(dim: usize, n: usize, r: usize) -> Result<Self> {
        let r = r as i64;
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..dim {
            lo[a] = -r;
            hi[a] = r;
        }
        Self::cell_box(dim, n, lo, hi)
    }

    pub fn epsilon(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::PeriodicBox
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().product()
    }

    /// Face counts per axis for component `a`.
    pub fn face_dims(&self, a: usize) -> [usize; 3] {
        let mut d = self.cells;
        if !self.is_periodic() {
            d[a] += 1;
        }
        d
    }

    pub fn face_count(&self, a: usize) -> usize {
        self.face_dims(a).iter().product()
    }

    /// Cell volume `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    #[inline]
    pub fn cell_linear(&self, i: [usize; 3]) -> usize {
        i[0] + self.cells[0] * (i[1] + self.cells[1] * i[2])
    }

    #[inline]
    pub fn cell_multi(&self, idx: usize) -> [usize; 3] {
        let nx = self.cells[0];
        let ny = self.cells[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn face_linear(&self, a: usize, i: [usize; 3]) -> usize {
        let d = self.face_dims(a);
        i[0] + d[0] * (i[1] + d[1] * i[2])
    }

    #[inline]
    pub fn face_multi(&self, a: usize, idx: usize) -> [usize; 3] {
        let d = self.face_dims(a);
        [idx % d[0], (idx / d[0]) % d[1], idx / (d[0] * d[1])]
    }

    /// Physical position of a cell center.
    pub fn cell_center(&self, i: [usize; 3]) -> [f64; 3] {
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = (self.offset[a] as f64 + i[a] as f64 + 0.5) * self.h;
        }
        x
    }

    /// Physical position of the midpoint of face `i` of component `a`.
    pub fn face_center(&self, a: usize, i: [usize; 3]) -> [f64; 3] {
        let mut x = self.cell_center(i);
        x[a] -= 0.5 * self.h;
        x
    }

    /// Lattice cell index and local coordinate in `(-1/2,1/2)` of a point
    /// given in global half-steps (`2 g + 1` for a cell center, `2 g` for a face).
    #[inline]
    pub(crate) fn lattice_split(&self, half_steps: i64) -> (i64, f64) {
        let n2 = 2 * self.n as i64;
        let k = half_steps.div_euclid(n2);
        let l = half_steps.rem_euclid(n2);
        (k, l as f64 / n2 as f64 - 0.5)
    }

    /// Whether the whole lattice cell `k` (in this grid's scale) lies inside
    /// the box. Periodic boxes contain every cell.
    pub(crate) fn contains_lattice_cell(&self, k: &[i64; 3]) -> bool {
        if self.is_periodic() {
            return true;
        }
        let n = self.n as i64;
        (0..self.dim).all(|a| {
            let lo = self.offset[a];
            let hi = lo + self.cells[a] as i64;
            k[a] * n >= lo && (k[a] + 1) * n <= hi
        })
    }

    pub fn same_layout(&self, other: &MacGrid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && self.m == other.m
            && self.cells == other.cells
            && self.offset == other.offset
            && self.boundary == other.boundary
    }
}

/// Face-staggered vector field; `comps[a]` has `grid.face_count(a)` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub comps: Vec<Vec<f64>>,
}

impl VelocityField {
    pub fn zeros(grid: &MacGrid) -> Self {
        Self {
            comps: (0..grid.dim)
                .map(|a| vec![0.0; grid.face_count(a)])
                .collect(),
        }
    }

    /// Evaluate `f` at every face midpoint (component `a` of `f` on `a`-faces).
    pub fn from_fn<F: FnMut(&[f64; 3]) -> [f64; 3]>(grid: &MacGrid, mut f: F) -> Self {
        let mut comps = Vec::with_capacity(grid.dim);
        for a in 0..grid.dim {
            let mut c = Vec::with_capacity(grid.face_count(a));
            for idx in 0..grid.face_count(a) {
                c.push(f(&grid.face_center(a, grid.face_multi(a, idx)))[a]);
            }
            comps.push(c);
        }
        Self { comps }
    }

    pub fn check(&self, grid: &MacGrid) -> Result<()> {
        if self.comps.len() != grid.dim
            || (0..grid.dim).any(|a| self.comps[a].len() != grid.face_count(a))
        {
            return Err(Error::ShapeMismatch(
                "velocity field does not match the grid".into(),
            ));
        }
        Ok(())
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for c in &mut self.comps {
            c.iter_mut().for_each(|v| *v *= s);
        }
        self
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: f64, other: &VelocityField) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += s * y;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Cell-centered scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureField {
    pub values: Vec<f64>,
}

impl PressureField {
    pub fn zeros(grid: &MacGrid) -> Self {
        Self {
            values: vec![0.0; grid.cell_count()],
        }
    }

    pub fn from_fn<F: FnMut(&[f64; 3]) -> f64>(grid: &MacGrid, mut f: F) -> Self {
        Self {
            values: (0..grid.cell_count())
                .map(|idx| f(&grid.cell_center(grid.cell_multi(idx))))
                .collect(),
        }
    }

    pub fn check(&self, grid: &MacGrid) -> Result<()> {
        if self.values.len() != grid.cell_count() {
            return Err(Error::ShapeMismatch(
                "pressure field does not match the grid".into(),
            ));
        }
        Ok(())
    }

    /// Mean over fluid cells.
    pub fn fluid_mean(&self, mask: &FluidMask) -> f64 {
        let mut s = 0.0;
        let mut c = 0usize;
        for (v, f) in self.values.iter().zip(&mask.cells) {
            if *f {
                s += v;
                c += 1;
            }
        }
        if c == 0 {
            0.0
        } else {
            s / c as f64
        }
    }

    /// Subtract the fluid mean and zero solid cells.
    pub fn quotient(mut self, mask: &FluidMask) -> Self {
        let mean = self.fluid_mean(mask);
        for (v, f) in self.values.iter_mut().zip(&mask.cells) {
            *v = if *f { *v - mean } else { 0.0 };
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = MacGrid::unit(2, 8, 4, Boundary::DirichletBox).unwrap();
        assert_eq!(g.cells, [32, 32, 1]);
        assert_eq!(g.face_dims(0), [33, 32, 1]);
        assert_eq!(g.face_dims(1), [32, 33, 1]);
        let p = MacGrid::unit(3, 8, 2, Boundary::PeriodicBox).unwrap();
        assert_eq!(p.face_dims(2), [16, 16, 16]);
        assert!((p.h - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_integer_box() {
        let d = DomainSpec::new(2, &[0.0, 0.0], &[1.03, 1.0], 0.0).unwrap();
        assert!(MacGrid::new(8, 1, d, Boundary::DirichletBox).is_err());
        let d = DomainSpec::new(2, &[0.0, 0.0], &[1.5, 1.0], 0.0).unwrap();
        assert!(MacGrid::new(8, 1, d, Boundary::PeriodicBox).is_err());
    }

    #[test]
    fn truncated_box_indices() {
        let g = MacGrid::truncated(2, 4, 2).unwrap();
        assert_eq!(g.cells[0], 20);
        assert_eq!(g.offset[0], -8);
        assert!(g.contains_lattice_cell(&[-2, 2, 0]));
        assert!(!g.contains_lattice_cell(&[3, 0, 0]));
        // center of global cell 0 sits at local -1/2 + 1/8 in cell 0
        let (k, y) = g.lattice_split(1);
        assert_eq!(k, 0);
        assert!((y + 0.375).abs() < 1e-15);
        let (k, y) = g.lattice_split(-1);
        assert_eq!(k, -1);
        assert!((y - 0.375).abs() < 1e-15);
    }
}
