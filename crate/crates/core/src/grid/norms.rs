//! Discrete norms on masked MAC fields.
//!
//! `L2` uses the weight `h^d` per unknown. `H1Semi` is the energy of the
//! discrete Laplacian, `h^{d-2} <u, -h^2 Delta_h u>`, written as a sum of
//! squared forward differences (fluid/solid pairs use the zero value,
//! Dirichlet walls the reflected ghost). `H2Interior` sums squared centered
//! second differences (mixed ones on the four diagonal neighbors) at points
//! farther than the margin from the box boundary whose stencil is entirely
//! fluid.

use serde::{Deserialize, Serialize};

use super::mask::{face_cells, FluidMask};
use super::{MacGrid, PressureField, VelocityField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L2,
    H1Semi,
    H2Interior,
    L2Quotient,
    /// Gradient norm restricted to the interior region.
    H1SemiInterior,
}

#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Velocity(&'a VelocityField),
    Pressure(&'a PressureField),
}

pub fn norm(
    grid: &MacGrid,
    mask: &FluidMask,
    field: FieldRef,
    kind: NormKind,
    interior_margin: f64,
) -> Result<f64> {
    match field {
        FieldRef::Velocity(u) => velocity_norm(grid, mask, u, kind, interior_margin),
        FieldRef::Pressure(p) => pressure_norm(grid, mask, p, kind, interior_margin),
    }
}

#[inline]
fn step(
    i: [usize; 3],
    dims: [usize; 3],
    b: usize,
    delta: i64,
    periodic: bool,
) -> Option<[usize; 3]> {
    let mut j = i;
    let v = i[b] as i64 + delta;
    if v >= 0 && (v as usize) < dims[b] {
        j[b] = v as usize;
    } else if periodic {
        j[b] = v.rem_euclid(dims[b] as i64) as usize;
    } else {
        return None;
    }
    Some(j)
}

fn linear(i: [usize; 3], dims: [usize; 3]) -> usize {
    i[0] + dims[0] * (i[1] + dims[1] * i[2])
}

fn multi(idx: usize, dims: [usize; 3]) -> [usize; 3] {
    [
        idx % dims[0],
        (idx / dims[0]) % dims[1],
        idx / (dims[0] * dims[1]),
    ]
}

fn check_margin(kind: NormKind, margin: f64) -> Result<()> {
    if matches!(kind, NormKind::H2Interior | NormKind::H1SemiInterior) && !(margin > 0.0) {
        return Err(Error::InvalidGrid(
            "interior norms need a positive interior margin".into(),
        ));
    }
    Ok(())
}

/// Forward-difference energy of one staggered array.
fn h1_energy<P: Fn(usize) -> [f64; 3]>(
    grid: &MacGrid,
    values: &[f64],
    flags: &[bool],
    dims: [usize; 3],
    interior: Option<(&P, f64)>,
) -> f64 {
    let periodic = grid.is_periodic();
    let inside = |idx: usize| match interior {
        Some((pos, margin)) => grid.domain.boundary_distance(&pos(idx)) > margin,
        None => true,
    };
    let mut e = 0.0;
    for idx in 0..values.len() {
        if !flags[idx] || !inside(idx) {
            continue;
        }
        let u = values[idx];
        let i = multi(idx, dims);
        for b in 0..grid.dim {
            for delta in [-1i64, 1] {
                match step(i, dims, b, delta, periodic) {
                    None => {
                        if interior.is_none() {
                            e += 2.0 * u * u;
                        }
                    }
                    Some(j) => {
                        let jdx = linear(j, dims);
                        if flags[jdx] {
                            if delta == 1 && inside(jdx) {
                                let d = u - values[jdx];
                                e += d * d;
                            }
                        } else if interior.is_none() {
                            e += u * u;
                        }
                    }
                }
            }
        }
    }
    e * grid.h.powi(grid.dim as i32 - 2)
}

fn h2_energy<P: Fn(usize) -> [f64; 3]>(
    grid: &MacGrid,
    values: &[f64],
    flags: &[bool],
    dims: [usize; 3],
    pos: P,
    margin: f64,
) -> (f64, usize) {
    let periodic = grid.is_periodic();
    let dim = grid.dim;
    let h2 = grid.h * grid.h;
    let mut e = 0.0;
    let mut points = 0usize;
    'outer: for idx in 0..values.len() {
        if !flags[idx] || grid.domain.boundary_distance(&pos(idx)) <= margin {
            continue;
        }
        let i = multi(idx, dims);
        let at = |j: Option<[usize; 3]>| -> Option<f64> {
            let j = j?;
            let l = linear(j, dims);
            if flags[l] {
                Some(values[l])
            } else {
                None
            }
        };
        let u = values[idx];
        let mut local = 0.0;
        for b in 0..dim {
            let (Some(up), Some(dn)) = (
                at(step(i, dims, b, 1, periodic)),
                at(step(i, dims, b, -1, periodic)),
            ) else {
                continue 'outer;
            };
            let d = (up - 2.0 * u + dn) / h2;
            local += d * d;
            for c in (b + 1)..dim {
                let diag = |sb: i64, sc: i64| {
                    at(step(i, dims, b, sb, periodic).and_then(|j| step(j, dims, c, sc, periodic)))
                };
                let (Some(pp), Some(pm), Some(mp), Some(mm)) =
                    (diag(1, 1), diag(1, -1), diag(-1, 1), diag(-1, -1))
                else {
                    continue 'outer;
                };
                let d = (pp - pm - mp + mm) / (4.0 * h2);
                local += 2.0 * d * d;
            }
        }
        e += local;
        points += 1;
    }
    (e * grid.cell_volume(), points)
}

pub fn velocity_norm(
    grid: &MacGrid,
    mask: &FluidMask,
    u: &VelocityField,
    kind: NormKind,
    interior_margin: f64,
) -> Result<f64> {
    u.check(grid)?;
    mask.check(grid)?;
    check_margin(kind, interior_margin)?;
    let vol = grid.cell_volume();
    let mut total = 0.0;
    let mut points = 0usize;
    for a in 0..grid.dim {
        let vals = &u.comps[a];
        let flags = &mask.faces[a];
        let dims = grid.face_dims(a);
        let pos = |idx: usize| grid.face_center(a, grid.face_multi(a, idx));
        match kind {
            NormKind::L2 => {
                total += vals
                    .iter()
                    .zip(flags)
                    .filter(|(_, f)| **f)
                    .map(|(v, _)| v * v)
                    .sum::<f64>()
                    * vol;
            }
            NormKind::L2Quotient => {
                let (s, c) = vals
                    .iter()
                    .zip(flags)
                    .filter(|(_, f)| **f)
                    .fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
                let mean = if c > 0 { s / c as f64 } else { 0.0 };
                total += vals
                    .iter()
                    .zip(flags)
                    .filter(|(_, f)| **f)
                    .map(|(v, _)| (v - mean) * (v - mean))
                    .sum::<f64>()
                    * vol;
            }
            NormKind::H1Semi => {
                total += h1_energy::<fn(usize) -> [f64; 3]>(grid, vals, flags, dims, None)
            }
            NormKind::H1SemiInterior => {
                total += h1_energy(grid, vals, flags, dims, Some((&pos, interior_margin)))
            }
            NormKind::H2Interior => {
                let (e, p) = h2_energy(grid, vals, flags, dims, pos, interior_margin);
                total += e;
                points += p;
            }
        }
    }
    if kind == NormKind::H2Interior && points == 0 {
        return Err(Error::EmptyInteriorRegion);
    }
    Ok(total.sqrt())
}

pub fn pressure_norm(
    grid: &MacGrid,
    mask: &FluidMask,
    p: &PressureField,
    kind: NormKind,
    interior_margin: f64,
) -> Result<f64> {
    p.check(grid)?;
    mask.check(grid)?;
    check_margin(kind, interior_margin)?;
    let vol = grid.cell_volume();
    let fluid = || {
        p.values
            .iter()
            .zip(&mask.cells)
            .filter(|(_, f)| **f)
            .map(|(v, _)| *v)
    };
    match kind {
        NormKind::L2 => Ok((fluid().map(|v| v * v).sum::<f64>() * vol).sqrt()),
        NormKind::L2Quotient => {
            let mean = p.fluid_mean(mask);
            Ok((fluid().map(|v| (v - mean) * (v - mean)).sum::<f64>() * vol).sqrt())
        }
        NormKind::H1Semi | NormKind::H1SemiInterior => {
            // differences across fluid faces: both neighbors are fluid cells
            let mut e = 0.0;
            let mut any = false;
            for a in 0..grid.dim {
                for (f, fl) in mask.faces[a].iter().enumerate() {
                    if !*fl {
                        continue;
                    }
                    let fi = grid.face_multi(a, f);
                    if kind == NormKind::H1SemiInterior
                        && grid.domain.boundary_distance(&grid.face_center(a, fi))
                            <= interior_margin
                    {
                        continue;
                    }
                    let (lo, hi) = face_cells(grid, a, fi).expect("fluid faces are interior");
                    let d = p.values[hi] - p.values[lo];
                    e += d * d;
                    any = true;
                }
            }
            if kind == NormKind::H1SemiInterior && !any {
                return Err(Error::EmptyInteriorRegion);
            }
            Ok((e * grid.h.powi(grid.dim as i32 - 2)).sqrt())
        }
        NormKind::H2Interior => {
            let pos = |idx: usize| grid.cell_center(grid.cell_multi(idx));
            let (e, points) = h2_energy(
                grid,
                &p.values,
                &mask.cells,
                grid.cells,
                pos,
                interior_margin,
            );
            if points == 0 {
                return Err(Error::EmptyInteriorRegion);
            }
            Ok(e.sqrt())
        }
    }
}
