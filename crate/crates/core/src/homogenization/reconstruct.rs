//! Two-scale reconstruction and remainders.

use serde::Serialize;

use super::darcy::DarcySolution;
use super::force::ForceField;
use crate::cell::CorrectorSet;
use crate::error::{Error, Result};
use crate::grid::mask::cell_faces;
use crate::grid::norms::{pressure_norm, velocity_norm};
use crate::grid::{
    two_scale_sample, two_scale_sample_pressure, FluidMask, MacGrid, NormKind, PressureField,
    VelocityField,
};

/// Source of the macroscopic pressure `p0`.
#[derive(Clone, Copy, Debug)]
pub enum MacroPressure<'a> {
    /// `p0 = 0`, valid when `div(A f) = 0`.
    Zero,
    Darcy(&'a DarcySolution),
}

impl MacroPressure<'_> {
    fn value(&self, x: &[f64; 3]) -> f64 {
        match self {
            MacroPressure::Zero => 0.0,
            MacroPressure::Darcy(d) => d.p0_at(x),
        }
    }

    fn gradient(&self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            MacroPressure::Zero => [0.0; 3],
            MacroPressure::Darcy(d) => d.grad_p0_at(x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FirstOrder {
    /// `eps^2 sum_j w_j(x/eps) (f_j - d_j p0)` on the fluid faces.
    pub u1: VelocityField,
    /// `p0 + eps sum_j (p_j(x/eps) - lambda_j) (f_j - d_j p0)` on the fluid cells.
    pub p1: PressureField,
    /// Fluid means of `p_j(x/eps)`.
    pub lambda_eps: Vec<f64>,
}

pub fn reconstruct_first_order(
    correctors: &CorrectorSet,
    force: &ForceField,
    p0: MacroPressure,
    grid: &MacGrid,
    mask: &FluidMask,
) -> Result<FirstOrder> {
    let dim = grid.dim;
    force.validate(dim)?;
    mask.check(grid)?;
    if correctors.w.len() != dim || correctors.p.len() != dim {
        return Err(Error::InconsistentGrids(format!("need {dim} correctors")));
    }
    let eps = grid.epsilon();
    let w: Vec<VelocityField> = correctors
        .w
        .iter()
        .map(|wj| two_scale_sample(wj, &correctors.grid, grid))
        .collect::<Result<_>>()?;
    let p: Vec<PressureField> = correctors
        .p
        .iter()
        .map(|pj| two_scale_sample_pressure(pj, &correctors.grid, grid))
        .collect::<Result<_>>()?;
    let lambda_eps: Vec<f64> = p.iter().map(|pj| pj.fluid_mean(mask)).collect();
    let weights = |x: &[f64; 3]| {
        let f = force.value(dim, x);
        let g = p0.gradient(x);
        let mut c = [0.0; 3];
        for j in 0..dim {
            c[j] = f[j] - g[j];
        }
        c
    };

    let mut u1 = VelocityField::zeros(grid);
    for a in 0..dim {
        for (f, v) in u1.comps[a].iter_mut().enumerate() {
            if !mask.faces[a][f] {
                continue;
            }
            let c = weights(&grid.face_center(a, grid.face_multi(a, f)));
            *v = eps * eps * (0..dim).map(|j| w[j].comps[a][f] * c[j]).sum::<f64>();
        }
    }
    let mut p1 = PressureField::zeros(grid);
    for (cell, v) in p1.values.iter_mut().enumerate() {
        if !mask.cells[cell] {
            continue;
        }
        let x = grid.cell_center(grid.cell_multi(cell));
        let c = weights(&x);
        *v = p0.value(&x)
            + eps
                * (0..dim)
                    .map(|j| (p[j].values[cell] - lambda_eps[j]) * c[j])
                    .sum::<f64>();
    }
    Ok(FirstOrder { u1, p1, lambda_eps })
}

#[derive(Clone, Debug, Serialize)]
pub struct RemainderReport {
    pub label: String,
    pub epsilon: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2_interior: f64,
    pub pressure_quotient: f64,
    pub pressure_h1_interior: f64,
    /// `||div_h R||_{L^2}` over the fluid cells.
    pub divergence: f64,
}

impl RemainderReport {
    /// `(eps^-2 ||R||, eps^-1 ||grad R||, ||D^2 R||)`.
    pub fn scaled(&self) -> [f64; 3] {
        let e = self.epsilon;
        [self.l2 / (e * e), self.h1 / e, self.h2_interior]
    }
}

/// `||div_h u||_{L^2}` over the fluid cells, using every face value.
pub fn divergence_l2(grid: &MacGrid, mask: &FluidMask, u: &VelocityField) -> Result<f64> {
    u.check(grid)?;
    mask.check(grid)?;
    let mut s = 0.0;
    for c in 0..grid.cell_count() {
        if !mask.cells[c] {
            continue;
        }
        let mut d = 0.0;
        for a in 0..grid.dim {
            let (lo, hi) = cell_faces(grid, a, c);
            d += (u.comps[a][hi] - u.comps[a][lo]) / grid.h;
        }
        s += d * d;
    }
    Ok((s * grid.cell_volume()).sqrt())
}

/// Norms of `R = u - u1` and `pi = p - p1`.
#[allow(clippy::too_many_arguments)]
pub fn remainder(
    label: &str,
    grid: &MacGrid,
    mask: &FluidMask,
    u: &VelocityField,
    p: &PressureField,
    u1: &VelocityField,
    p1: &PressureField,
    interior_margin: f64,
) -> Result<RemainderReport> {
    let mut r = u.clone();
    r.add_scaled(-1.0, u1);
    for (a, comp) in r.comps.iter_mut().enumerate() {
        for (v, fluid) in comp.iter_mut().zip(&mask.faces[a]) {
            if !fluid {
                *v = 0.0;
            }
        }
    }
    let mut pi = p.clone();
    for ((v, q), fluid) in pi.values.iter_mut().zip(&p1.values).zip(&mask.cells) {
        *v = if *fluid { *v - q } else { 0.0 };
    }
    Ok(RemainderReport {
        label: label.to_string(),
        epsilon: grid.epsilon(),
        l2: velocity_norm(grid, mask, &r, NormKind::L2, 0.0)?,
        h1: velocity_norm(grid, mask, &r, NormKind::H1Semi, 0.0)?,
        h2_interior: velocity_norm(grid, mask, &r, NormKind::H2Interior, interior_margin)?,
        pressure_quotient: pressure_norm(grid, mask, &pi, NormKind::L2Quotient, 0.0)?,
        pressure_h1_interior: pressure_norm(
            grid,
            mask,
            &pi,
            NormKind::H1SemiInterior,
            interior_margin,
        )?,
        divergence: divergence_l2(grid, mask, &r)?,
    })
}
