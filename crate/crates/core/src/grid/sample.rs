//! Evaluation of cell-scale fields at `x / epsilon` on a macroscopic grid.
//!
//! The macro grid at scale `epsilon = 1/m` and the cell grid at unit scale
//! share the per-cell resolution `n`, so both index the same lattice points
//! with the same global integers and sampling is a pure index map.

use super::{MacGrid, PressureField, VelocityField};
use crate::error::{Error, Result};

fn check(cell_grid: &MacGrid, macro_grid: &MacGrid) -> Result<()> {
    if cell_grid.n != macro_grid.n {
        return Err(Error::ResolutionMismatch {
            cell: cell_grid.n,
            macro_n: macro_grid.n,
        });
    }
    if cell_grid.m != 1 || cell_grid.dim != macro_grid.dim {
        return Err(Error::ShapeMismatch(
            "cell fields must live on a unit-scale grid of the same dimension".into(),
        ));
    }
    Ok(())
}

/// Index into the cell grid array of shape `dims` for global index `g` along `b`.
#[inline]
fn locate(cell_grid: &MacGrid, dims: [usize; 3], b: usize, g: i64) -> Option<usize> {
    let local = g - cell_grid.offset[b];
    if cell_grid.is_periodic() {
        Some(local.rem_euclid(cell_grid.cells[b] as i64) as usize)
    } else if local >= 0 && (local as usize) < dims[b] {
        Some(local as usize)
    } else {
        None
    }
}

fn sample_array(
    cell_grid: &MacGrid,
    cell_dims: [usize; 3],
    values: &[f64],
    macro_grid: &MacGrid,
    macro_dims: [usize; 3],
) -> Result<Vec<f64>> {
    let dim = macro_grid.dim;
    let count: usize = macro_dims.iter().product();
    let mut out = Vec::with_capacity(count);
    // per-axis lookup tables
    let mut tables: Vec<Vec<Option<usize>>> = Vec::with_capacity(3);
    for b in 0..3 {
        if b < dim {
            tables.push(
                (0..macro_dims[b])
                    .map(|i| locate(cell_grid, cell_dims, b, macro_grid.offset[b] + i as i64))
                    .collect(),
            );
        } else {
            tables.push(vec![Some(0)]);
        }
    }
    for k in 0..macro_dims[2] {
        for j in 0..macro_dims[1] {
            for i in 0..macro_dims[0] {
                let (Some(x), Some(y), Some(z)) = (tables[0][i], tables[1][j], tables[2][k]) else {
                    return Err(Error::ShapeMismatch(
                        "cell field does not cover the macroscopic box".into(),
                    ));
                };
                out.push(values[x + cell_dims[0] * (y + cell_dims[1] * z)]);
            }
        }
    }
    Ok(out)
}

/// `x -> cell_field(x / epsilon)` at the macro face midpoints.
pub fn two_scale_sample(
    cell_field: &VelocityField,
    cell_grid: &MacGrid,
    macro_grid: &MacGrid,
) -> Result<VelocityField> {
    check(cell_grid, macro_grid)?;
    cell_field.check(cell_grid)?;
    let comps = (0..macro_grid.dim)
        .map(|a| {
            sample_array(
                cell_grid,
                cell_grid.face_dims(a),
                &cell_field.comps[a],
                macro_grid,
                macro_grid.face_dims(a),
            )
        })
        .collect::<Result<_>>()?;
    Ok(VelocityField { comps })
}

/// `x -> cell_field(x / epsilon)` at the macro cell centers.
pub fn two_scale_sample_pressure(
    cell_field: &PressureField,
    cell_grid: &MacGrid,
    macro_grid: &MacGrid,
) -> Result<PressureField> {
    check(cell_grid, macro_grid)?;
    cell_field.check(cell_grid)?;
    Ok(PressureField {
        values: sample_array(
            cell_grid,
            cell_grid.cells,
            &cell_field.values,
            macro_grid,
            macro_grid.cells,
        )?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn cell_field(g: &MacGrid) -> VelocityField {
        VelocityField::from_fn(g, |x| [(x[0] * 7.0).sin() + x[1], x[0] * x[1], 0.0])
    }

    #[test]
    fn constant_maps_to_constant() {
        let cg = MacGrid::periodic_cell(2, 8).unwrap();
        let c = VelocityField::from_fn(&cg, |_| [1.5, -2.0, 0.0]);
        let mg = MacGrid::unit(2, 8, 4, Boundary::DirichletBox).unwrap();
        let s = two_scale_sample(&c, &cg, &mg).unwrap();
        assert!(s.comps[0].iter().all(|v| *v == 1.5));
        assert!(s.comps[1].iter().all(|v| *v == -2.0));
    }

    #[test]
    fn one_cell_is_identity() {
        let cg = MacGrid::periodic_cell(3, 4).unwrap();
        let c = VelocityField::from_fn(&cg, |x| [x[0], x[1] * 2.0, x[2] - x[0]]);
        let d = crate::geometry::DomainSpec::unit(3, 0.0).unwrap();
        let mg = MacGrid::new(4, 1, d, Boundary::PeriodicBox).unwrap();
        assert_eq!(two_scale_sample(&c, &cg, &mg).unwrap(), c);
    }

    #[test]
    fn tiling_matches_direct_repetition() {
        let cg = MacGrid::periodic_cell(2, 8).unwrap();
        let c = cell_field(&cg);
        let mg = MacGrid::unit(2, 8, 4, Boundary::DirichletBox).unwrap();
        let s = two_scale_sample(&c, &cg, &mg).unwrap();
        for a in 0..2 {
            for f in 0..mg.face_count(a) {
                let i = mg.face_multi(a, f);
                let ci = [i[0] % 8, i[1] % 8, 0];
                assert_eq!(s.comps[a][f], c.comps[a][cg.face_linear(a, ci)]);
            }
        }
    }

    #[test]
    fn resolution_mismatch() {
        let cg = MacGrid::periodic_cell(2, 8).unwrap();
        let mg = MacGrid::unit(2, 16, 2, Boundary::DirichletBox).unwrap();
        assert!(matches!(
            two_scale_sample(&VelocityField::zeros(&cg), &cg, &mg),
            Err(Error::ResolutionMismatch {
                cell: 8,
                macro_n: 16
            })
        ));
    }

    #[test]
    fn truncated_field_must_cover() {
        let cg = MacGrid::cell_box(2, 4, [0, 0, 0], [1, 1, 0]).unwrap();
        let c = VelocityField::zeros(&cg);
        let ok = MacGrid::unit(2, 4, 2, Boundary::DirichletBox).unwrap();
        assert!(two_scale_sample(&c, &cg, &ok).is_ok());
        let too_big = MacGrid::unit(2, 4, 4, Boundary::DirichletBox).unwrap();
        assert!(two_scale_sample(&c, &cg, &too_big).is_err());
    }
}
