use std::collections::BTreeMap;

use super::MacGrid;
use crate::error::{Error, Result};
use crate::geometry::{CellIndex, CellShape, PerforationLattice};

/// Fluid/solid flags for pressure cells and velocity faces.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidMask {
    pub cells: Vec<bool>,
    pub faces: Vec<Vec<bool>>,
}

/// Resolved hole shapes, with the perturbed cells materialized once.
pub(crate) struct HoleLookup<'a> {
    base: &'a CellShape,
    special: BTreeMap<CellIndex, Option<CellShape>>,
}

impl<'a> HoleLookup<'a> {
    pub fn new(lattice: &'a PerforationLattice) -> Self {
        let special = lattice
            .perturbation
            .overrides
            .keys()
            .map(|k| (*k, lattice.hole(k).map(|c| c.into_owned())))
            .collect();
        Self {
            base: &lattice.base_shape,
            special,
        }
    }

    pub fn get(&self, k: &CellIndex) -> Option<&CellShape> {
        match self.special.get(k) {
            Some(s) => s.as_ref(),
            None => Some(self.base),
        }
    }
}

impl FluidMask {
    /// Mask of the box without holes.
    pub fn unperforated(grid: &MacGrid) -> Result<Self> {
        build(grid, |_| false)
    }

    pub fn fluid_cell_count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    pub fn fluid_fraction(&self) -> f64 {
        self.fluid_cell_count() as f64 / self.cells.len() as f64
    }

    pub fn solid_cell_count(&self) -> usize {
        self.cells.len() - self.fluid_cell_count()
    }

    pub fn check(&self, grid: &MacGrid) -> Result<()> {
        if self.cells.len() != grid.cell_count()
            || self.faces.len() != grid.dim
            || (0..grid.dim).any(|a| self.faces[a].len() != grid.face_count(a))
        {
            return Err(Error::ShapeMismatch("mask does not match the grid".into()));
        }
        Ok(())
    }
}

/// Whether the lattice point at the given global half-step coordinates lies
/// in a hole of a cell `k` of `Y_eps` (cells fully inside the box).
pub(crate) fn in_hole(grid: &MacGrid, holes: &HoleLookup, half: &[i64; 3]) -> bool {
    let mut k = [0i64; 3];
    let mut y = [0.0; 3];
    for a in 0..grid.dim {
        let (ka, ya) = grid.lattice_split(half[a]);
        k[a] = ka;
        y[a] = ya;
    }
    if !grid.contains_lattice_cell(&k) {
        return false;
    }
    holes.get(&k).map(|s| s.contains(&y)).unwrap_or(false)
}

/// Voxelize `Omega_eps` on the grid.
///
/// A cell is solid iff its center lies in a hole. A face is fluid iff its
/// midpoint is outside every hole, it is not a wall-normal face of a
/// Dirichlet box, and both neighboring cells are fluid.
pub fn rasterize(lattice: &PerforationLattice, grid: &MacGrid) -> Result<FluidMask> {
    if lattice.dim != grid.dim {
        return Err(Error::ShapeMismatch(format!(
            "lattice is {}-dimensional, grid {}-dimensional",
            lattice.dim, grid.dim
        )));
    }
    let holes = HoleLookup::new(lattice);
    build(grid, |half| in_hole(grid, &holes, half))
}

fn build<F: Fn(&[i64; 3]) -> bool>(grid: &MacGrid, solid_at: F) -> Result<FluidMask> {
    let dim = grid.dim;
    let mut cells = vec![false; grid.cell_count()];
    for (idx, c) in cells.iter_mut().enumerate() {
        let i = grid.cell_multi(idx);
        let mut half = [0i64; 3];
        for a in 0..dim {
            half[a] = 2 * (grid.offset[a] + i[a] as i64) + 1;
        }
        *c = !solid_at(&half);
    }
    let mut faces = Vec::with_capacity(dim);
    for a in 0..dim {
        let mut fa = vec![false; grid.face_count(a)];
        for (idx, f) in fa.iter_mut().enumerate() {
            let i = grid.face_multi(a, idx);
            let Some((lo, hi)) = face_cells(grid, a, i) else {
                continue;
            };
            if !(cells[lo] && cells[hi]) {
                continue;
            }
            let mut half = [0i64; 3];
            for b in 0..dim {
                half[b] = 2 * (grid.offset[b] + i[b] as i64) + if b == a { 0 } else { 1 };
            }
            *f = !solid_at(&half);
        }
        faces.push(fa);
    }
    // cells cut off from every face carry no flow
    for idx in 0..cells.len() {
        if cells[idx] && !has_fluid_face(grid, &faces, idx) {
            cells[idx] = false;
        }
    }
    let mask = FluidMask { cells, faces };
    let components = count_components(grid, &mask);
    if components > 1 {
        return Err(Error::DisconnectedFluid { components });
    }
    Ok(mask)
}

/// Cells on the low and high side of face `i` of component `a`, or `None`
/// for wall faces of a Dirichlet box.
#[inline]
pub(crate) fn face_cells(grid: &MacGrid, a: usize, i: [usize; 3]) -> Option<(usize, usize)> {
    let n = grid.cells[a];
    let mut lo = i;
    let hi_i = i;
    if grid.is_periodic() {
        lo[a] = (i[a] + n - 1) % n;
    } else {
        if i[a] == 0 || i[a] == n {
            return None;
        }
        lo[a] = i[a] - 1;
    }
    Some((grid.cell_linear(lo), grid.cell_linear(hi_i)))
}

/// Faces of cell `idx` on its low and high side along axis `a`.
#[inline]
pub(crate) fn cell_faces(grid: &MacGrid, a: usize, idx: usize) -> (usize, usize) {
    let i = grid.cell_multi(idx);
    let mut hi = i;
    if grid.is_periodic() {
        hi[a] = (i[a] + 1) % grid.cells[a];
    } else {
        hi[a] = i[a] + 1;
    }
    (grid.face_linear(a, i), grid.face_linear(a, hi))
}

fn has_fluid_face(grid: &MacGrid, faces: &[Vec<bool>], idx: usize) -> bool {
    (0..grid.dim).any(|a| {
        let (lo, hi) = cell_faces(grid, a, idx);
        faces[a][lo] || faces[a][hi]
    })
}

fn count_components(grid: &MacGrid, mask: &FluidMask) -> usize {
    let mut seen = vec![false; mask.cells.len()];
    let mut components = 0;
    let mut stack = Vec::new();
    for start in 0..mask.cells.len() {
        if !mask.cells[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(c) = stack.pop() {
            for a in 0..grid.dim {
                let (lo, hi) = cell_faces(grid, a, c);
                if mask.faces[a][lo] {
                    let (l, _) = face_cells(grid, a, grid.face_multi(a, lo)).unwrap();
                    if !seen[l] {
                        seen[l] = true;
                        stack.push(l);
                    }
                }
                if mask.faces[a][hi] {
                    let (_, r) = face_cells(grid, a, grid.face_multi(a, hi)).unwrap();
                    if !seen[r] {
                        seen[r] = true;
                        stack.push(r);
                    }
                }
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hole_indicator, Override, PerturbationSpec};
    use crate::grid::Boundary;

    #[test]
    fn no_holes_all_fluid() {
        let g = MacGrid::unit(2, 8, 2, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        assert_eq!(m.fluid_fraction(), 1.0);
        // wall-normal faces are solid
        assert!(!m.faces[0][g.face_linear(0, [0, 3, 0])]);
        assert!(m.faces[0][g.face_linear(0, [1, 3, 0])]);
    }

    #[test]
    fn disk_fluid_fraction() {
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let g = MacGrid::periodic_cell(2, 64).unwrap();
        let m = rasterize(&l, &g).unwrap();
        let exact = 1.0 - std::f64::consts::PI / 16.0;
        assert!((m.fluid_fraction() - exact).abs() < 2.0 / 64.0);
    }

    #[test]
    fn ball_solid_count_matches_membership_oracle() {
        let l = PerforationLattice::periodic(CellShape::centered_ball(3, 0.25).unwrap());
        let g = MacGrid::unit(3, 16, 4, Boundary::DirichletBox).unwrap();
        let m = rasterize(&l, &g).unwrap();
        let mut oracle = 0;
        for idx in 0..g.cell_count() {
            let x = g.cell_center(g.cell_multi(idx));
            let y: Vec<f64> = x[..3].iter().map(|v| v * 4.0 - 0.5).collect();
            if hole_indicator(&l, &y) {
                oracle += 1;
            }
        }
        assert_eq!(m.solid_cell_count(), oracle);
    }

    #[test]
    fn removal_restores_fluid() {
        let l = PerforationLattice::new(
            CellShape::centered_ball(2, 0.25).unwrap(),
            PerturbationSpec::none().with([1, 1, 0], Override::Remove),
            Default::default(),
        )
        .unwrap();
        let g = MacGrid::unit(2, 8, 4, Boundary::DirichletBox).unwrap();
        let m = rasterize(&l, &g).unwrap();
        let center = |k: usize| g.cell_linear([k * 8 + 4, k * 8 + 4, 0]);
        assert!(m.cells[center(1)]);
        assert!(!m.cells[center(2)]);
    }

    #[test]
    fn partial_cells_at_box_edge_are_not_perforated() {
        let l = PerforationLattice::periodic(CellShape::centered_ball(2, 0.25).unwrap());
        let d = crate::geometry::DomainSpec::new(2, &[0.0, 0.0], &[1.5, 1.0], 0.0).unwrap();
        let g = MacGrid::new(8, 1, d, Boundary::DirichletBox).unwrap();
        let m = rasterize(&l, &g).unwrap();
        assert!(!m.cells[g.cell_linear([4, 4, 0])]);
        assert!(m.cells[g.cell_linear([11, 4, 0])]);
    }

    #[test]
    fn disconnected_fluid_detected() {
        // a wide square hole (superellipsoid, high exponent) in a single
        // Dirichlet cell leaves four corner pockets only connected through
        // thin gaps at n = 4
        let s = CellShape::new(
            2,
            crate::geometry::ShapeKind::Superellipsoid,
            &[0.0, 0.0],
            &[0.49, 0.2],
            Some(8.0),
        )
        .unwrap();
        let l = PerforationLattice::periodic(s);
        let g = MacGrid::unit(2, 8, 1, Boundary::DirichletBox).unwrap();
        match rasterize(&l, &g) {
            Err(Error::DisconnectedFluid { components }) => assert_eq!(components, 2),
            other => panic!(
                "expected disconnect, got {:?}",
                other.map(|m| m.fluid_cell_count())
            ),
        }
    }
}
