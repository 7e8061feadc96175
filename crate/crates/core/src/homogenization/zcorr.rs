//! Cell lifts that cancel the leading divergence of the first-order velocity.
//!
//! `z_j^i` vanishes on the cell boundary and the hole and satisfies
//! `div z_j^i = -(wbar_j^i - chi A_j^i)`, where `wbar` is the cell-centered
//! average of component `i` of `w_j` and `chi` a unit-mass bump in a corner
//! of the cell frame. Tiled over the lattice it yields
//! `div(u1 + eps^3 sum z_j^i(x/eps) d_i f_j) = eps^2 chi(x/eps) div(A f) + O(eps^3)`.

use super::force::ForceField;
use super::reconstruct::FirstOrder;
use crate::cell::{PeriodicCorrectors, PermeabilityTensor};
use crate::error::{Error, Result};
use crate::geometry::{FrameMargins, PerforationLattice};
use crate::grid::mask::cell_faces;
use crate::grid::{rasterize, two_scale_sample, FluidMask, MacGrid, PressureField, VelocityField};
use crate::stokes::{divergence_lift, SolverConfig};

#[derive(Clone, Debug)]
pub struct DivergenceCorrectors {
    /// The periodic cell grid the fields live on.
    pub grid: MacGrid,
    /// `z[i][j]`.
    pub z: Vec<Vec<VelocityField>>,
    pub chi: PressureField,
    /// Lift constants `||z||_{W^{1,2}} / ||div z||`.
    pub constants: Vec<Vec<f64>>,
}

/// `(1 - t^2)^4` tensor bump in the low corner of the frame, normalized to
/// unit discrete mass over the fluid cells.
pub fn chi_bump(grid: &MacGrid, mask: &FluidMask, frame: &FrameMargins) -> Result<PressureField> {
    let half = 0.5 * frame.inset;
    let c = -0.5 + half;
    let mut chi = PressureField::zeros(grid);
    for (cell, v) in chi.values.iter_mut().enumerate() {
        if !mask.cells[cell] {
            continue;
        }
        let x = grid.cell_center(grid.cell_multi(cell));
        let mut b = 1.0;
        for a in 0..grid.dim {
            // cell coordinates of the unit periodic cell run over [0, 1)
            let t = (x[a] - 0.5 - c) / half;
            b *= if t.abs() < 1.0 {
                (1.0 - t * t).powi(4)
            } else {
                0.0
            };
        }
        *v = b;
    }
    let mass: f64 = chi.values.iter().sum::<f64>() * grid.cell_volume();
    if !(mass > 0.0) {
        return Err(Error::InvalidGrid(
            "cell too coarse to resolve the frame bump".into(),
        ));
    }
    chi.values.iter_mut().for_each(|v| *v /= mass);
    Ok(chi)
}

pub fn divergence_correctors(
    periodic: &PeriodicCorrectors,
    perm: &PermeabilityTensor,
    frame: &FrameMargins,
    cfg: &SolverConfig,
) -> Result<DivergenceCorrectors> {
    let per = periodic.grid();
    let dim = per.dim;
    let n = per.n;
    let chi = chi_bump(per, &periodic.cell.mask, frame)?;
    let lattice = PerforationLattice::periodic(periodic.cell.shape.clone());
    let boxed = MacGrid::cell_box(dim, n, [0; 3], [0; 3])?;
    let bmask = rasterize(&lattice, &boxed)?;
    let mut z = Vec::new();
    let mut constants = Vec::new();
    for i in 0..dim {
        let mut zi = Vec::new();
        let mut ci = Vec::new();
        for j in 0..dim {
            let w = &periodic.w[j].comps[i];
            let mut g = PressureField::zeros(&boxed);
            for c in 0..per.cell_count() {
                if !bmask.cells[c] {
                    continue;
                }
                let (lo, hi) = cell_faces(per, i, c);
                let wbar = 0.5 * (w[lo] + w[hi]);
                g.values[c] = -(wbar - chi.values[c] * perm.a_velocity[i][j]);
            }
            let lift = divergence_lift(&boxed, &bmask, &g, cfg)?;
            // drop the high wall faces (zero) to get the periodic layout
            let mut zp = VelocityField::zeros(per);
            for a in 0..dim {
                for (f, v) in zp.comps[a].iter_mut().enumerate() {
                    let idx = per.face_multi(a, f);
                    *v = lift.velocity.comps[a][boxed.face_linear(a, idx)];
                }
            }
            zi.push(zp);
            ci.push(lift.constant);
        }
        z.push(zi);
        constants.push(ci);
    }
    Ok(DivergenceCorrectors {
        grid: per.clone(),
        z,
        chi,
        constants,
    })
}

/// `u1 + eps^3 sum_{i,j} z_j^i(x/eps) d_i f_j(x)` on the fluid faces.
pub fn corrected_velocity(
    first: &FirstOrder,
    zc: &DivergenceCorrectors,
    force: &ForceField,
    grid: &MacGrid,
    mask: &FluidMask,
) -> Result<VelocityField> {
    let dim = grid.dim;
    let eps = grid.epsilon();
    let mut out = first.u1.clone();
    for i in 0..dim {
        for j in 0..dim {
            let z = two_scale_sample(&zc.z[i][j], &zc.grid, grid)?;
            for a in 0..dim {
                for (f, v) in out.comps[a].iter_mut().enumerate() {
                    if !mask.faces[a][f] {
                        continue;
                    }
                    let x = grid.face_center(a, grid.face_multi(a, f));
                    let mut al = [0; 3];
                    al[i] = 1;
                    *v += eps.powi(3) * z.comps[a][f] * force.derivative(dim, j, al, &x);
                }
            }
        }
    }
    Ok(out)
}
