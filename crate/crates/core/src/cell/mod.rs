//! Cell correctors and the permeability tensor.

mod permeability;
mod truncated;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{CellShape, PerforationLattice};
use crate::grid::{rasterize, Discretization, FluidMask, MacGrid, PressureField, VelocityField};
use crate::stokes::{SaddleSolver, SolveStats, SolverConfig};

pub use permeability::{permeability, PermeabilityTensor};
pub use truncated::{
    corrector_pressure_stats, h1_difference_on_subbox, solve_corrector_on_box,
    solve_truncated_corrector, CorrectorPressureStats, TruncatedCorrector,
};

/// Default relative tolerance of corrector solves.
pub const CORRECTOR_RTOL: f64 = 1e-10;

/// One periodic reference cell with its discretization.
#[derive(Clone, Debug)]
pub struct PeriodicCell {
    pub shape: CellShape,
    pub grid: MacGrid,
    pub mask: FluidMask,
    pub disc: Discretization,
}

impl PeriodicCell {
    pub fn new(shape: &CellShape, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidGrid(format!(
                "cell resolution n = {n} below 8"
            )));
        }
        if shape.inclusion_margin() <= 0.0 {
            return Err(Error::InvalidGeometry(
                "hole is not strictly inside the cell".into(),
            ));
        }
        let grid = MacGrid::periodic_cell(shape.dim, n)?;
        let mask = rasterize(&PerforationLattice::periodic(shape.clone()), &grid)?;
        let disc = Discretization::new(&grid, &mask)?;
        Ok(Self {
            shape: shape.clone(),
            grid,
            mask,
            disc,
        })
    }

    /// Solve `-Delta w + grad p = e_j` on the periodic cell.
    pub fn corrector(
        &self,
        j: usize,
        cfg: &SolverConfig,
    ) -> Result<(VelocityField, PressureField, SolveStats)> {
        if j >= self.grid.dim {
            return Err(Error::InvalidGrid(format!("axis {j} out of range")));
        }
        let mut f = vec![0.0; self.disc.n_vel()];
        f[self.disc.vel_offset[j]..self.disc.vel_offset[j + 1]]
            .iter_mut()
            .for_each(|v| *v = 1.0);
        let g = vec![0.0; self.disc.n_p()];
        let (u, p, stats) = SaddleSolver::new(&self.disc).solve(&f, &g, cfg)?;
        Ok((
            self.disc.scatter_velocity(&u),
            self.disc.scatter_pressure(&p),
            stats,
        ))
    }
}

/// `(w_j^per, p_j^per)` for one axis, extended by zero into the hole.
pub fn solve_periodic_corrector(
    shape: &CellShape,
    n: usize,
    j: usize,
    cfg: &SolverConfig,
) -> Result<(VelocityField, PressureField, SolveStats)> {
    PeriodicCell::new(shape, n)?.corrector(j, cfg)
}

/// All `d` periodic correctors on one cell grid.
#[derive(Clone, Debug)]
pub struct PeriodicCorrectors {
    pub cell: PeriodicCell,
    pub w: Vec<VelocityField>,
    pub p: Vec<PressureField>,
    /// Pressure extension constants inside the hole.
    pub lambda: Vec<f64>,
    pub stats: Vec<SolveStats>,
}

impl PeriodicCorrectors {
    pub fn solve(shape: &CellShape, n: usize, cfg: &SolverConfig) -> Result<Self> {
        let cell = PeriodicCell::new(shape, n)?;
        let mut w = Vec::new();
        let mut p = Vec::new();
        let mut stats = Vec::new();
        for j in 0..shape.dim {
            let (wj, pj, sj) = cell.corrector(j, cfg)?;
            w.push(wj);
            p.push(pj);
            stats.push(sj);
        }
        Ok(Self {
            lambda: vec![0.0; shape.dim],
            cell,
            w,
            p,
            stats,
        })
    }

    pub fn grid(&self) -> &MacGrid {
        &self.cell.grid
    }
}

/// Correctors `w_j, p_j` on a unit-scale grid (periodic cell or truncated
/// box), ready for two-scale sampling.
#[derive(Clone, Debug)]
pub struct CorrectorSet {
    pub grid: MacGrid,
    pub w: Vec<VelocityField>,
    pub p: Vec<PressureField>,
    /// Non-periodic parts `w_j - w_j^per` and `p_j - p_j^per`, when known.
    pub w_tilde: Option<Vec<VelocityField>>,
    pub p_tilde: Option<Vec<PressureField>>,
}

impl CorrectorSet {
    pub fn from_periodic(c: &PeriodicCorrectors) -> Self {
        Self {
            grid: c.cell.grid.clone(),
            w: c.w.clone(),
            p: c.p.clone(),
            w_tilde: None,
            p_tilde: None,
        }
    }

    pub fn from_truncated(parts: Vec<TruncatedCorrector>) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InconsistentGrids("no correctors given".into()))?;
        let grid = first.grid.clone();
        if parts.iter().any(|t| !t.grid.same_layout(&grid)) {
            return Err(Error::InconsistentGrids(
                "truncated correctors on different boxes".into(),
            ));
        }
        let mut w = Vec::new();
        let mut p = Vec::new();
        let mut wt = Vec::new();
        let mut pt = Vec::new();
        for t in parts {
            w.push(t.w);
            p.push(t.p);
            wt.push(t.w_tilde);
            pt.push(t.p_tilde);
        }
        Ok(Self {
            grid,
            w,
            p,
            w_tilde: Some(wt),
            p_tilde: Some(pt),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectorMetadata {
    pub shape_hash: u64,
    pub n: usize,
    pub j: usize,
    pub bc: String,
    pub lambda: f64,
}

impl CorrectorMetadata {
    pub fn to_map(&self) -> std::collections::BTreeMap<String, String> {
        let mut m = std::collections::BTreeMap::new();
        m.insert("shape_hash".into(), format!("{:016x}", self.shape_hash));
        m.insert("n".into(), self.n.to_string());
        m.insert("j".into(), self.j.to_string());
        m.insert("bc".into(), self.bc.clone());
        m.insert("lambda".into(), self.lambda.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_contract_and_zero_in_hole() {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        let cell = PeriodicCell::new(&shape, 16).unwrap();
        let (w, p, stats) = cell.corrector(0, &SolverConfig::with_rtol(1e-10)).unwrap();
        assert!(stats.final_residual() <= 1e-9);
        // hole center cells/faces carry nothing
        let c = cell.grid.cell_linear([8, 8, 0]);
        assert!(!cell.mask.cells[c]);
        assert_eq!(p.values[c], 0.0);
        assert_eq!(w.comps[0][cell.grid.face_linear(0, [8, 8, 0])], 0.0);
        // divergence free
        let d = crate::grid::ops::div(&cell.disc, &w).unwrap();
        let worst = d.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn axis_swap_symmetry() {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        let c = PeriodicCorrectors::solve(&shape, 16, &SolverConfig::with_rtol(1e-10)).unwrap();
        let g = c.grid();
        let mut worst: f64 = 0.0;
        for f in 0..g.face_count(0) {
            let i = g.face_multi(0, f);
            let swapped = g.face_linear(1, [i[1], i[0], 0]);
            worst = worst.max((c.w[0].comps[0][f] - c.w[1].comps[1][swapped]).abs());
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn rejects_coarse_resolution() {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        assert!(PeriodicCell::new(&shape, 4).is_err());
    }
}
