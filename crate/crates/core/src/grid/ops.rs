//! Field-level wrappers around the compact stencils. Values on solid faces
//! and cells are ignored on input and zero on output.

use super::dofs::Discretization;
use super::{PressureField, VelocityField};
use crate::error::Result;

pub fn grad(disc: &Discretization, p: &PressureField) -> Result<VelocityField> {
    p.check(&disc.grid)?;
    let pv = disc.gather_pressure(p);
    let mut out = vec![0.0; disc.n_vel()];
    disc.apply_grad(&pv, &mut out);
    Ok(disc.scatter_velocity(&out))
}

pub fn div(disc: &Discretization, u: &VelocityField) -> Result<PressureField> {
    u.check(&disc.grid)?;
    let uv = disc.gather_velocity(u);
    let mut out = vec![0.0; disc.n_p()];
    disc.apply_div(&uv, &mut out);
    Ok(disc.scatter_pressure(&out))
}

/// `Delta_h u` (note the sign: the solver works with `-Delta_h`).
pub fn laplacian(disc: &Discretization, u: &VelocityField) -> Result<VelocityField> {
    u.check(&disc.grid)?;
    let uv = disc.gather_velocity(u);
    let mut out = vec![0.0; disc.n_vel()];
    disc.apply_laplacian(&uv, &mut out);
    out.iter_mut().for_each(|v| *v = -*v);
    Ok(disc.scatter_velocity(&out))
}

/// `<a, b>` over fluid faces with the cell-volume weight.
pub fn inner_velocity(disc: &Discretization, a: &VelocityField, b: &VelocityField) -> f64 {
    let av = disc.gather_velocity(a);
    let bv = disc.gather_velocity(b);
    crate::linalg::dot(&av, &bv) * disc.grid.cell_volume()
}

pub fn inner_pressure(disc: &Discretization, a: &PressureField, b: &PressureField) -> f64 {
    let av = disc.gather_pressure(a);
    let bv = disc.gather_pressure(b);
    crate::linalg::dot(&av, &bv) * disc.grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Boundary, FluidMask, MacGrid};
    use std::f64::consts::PI;

    fn periodic(n: usize) -> (MacGrid, Discretization) {
        let g = MacGrid::periodic_cell(2, n).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let d = Discretization::new(&g, &m).unwrap();
        (g, d)
    }

    #[test]
    fn constant_pressure_has_zero_gradient() {
        let (g, d) = periodic(8);
        let p = PressureField::from_fn(&g, |_| 3.5);
        assert_eq!(grad(&d, &p).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn linear_shear_is_exact() {
        // u = (y, 0) away from the walls, where the no-slip faces cut it off
        let g = MacGrid::unit(2, 16, 1, Boundary::DirichletBox).unwrap();
        let m = FluidMask::unperforated(&g).unwrap();
        let d = Discretization::new(&g, &m).unwrap();
        let u = VelocityField::from_fn(&g, |x| [x[1], 0.0, 0.0]);
        let dv = div(&d, &u).unwrap();
        for (c, v) in dv.values.iter().enumerate() {
            let i = g.cell_multi(c);
            if i[0] > 0 && i[0] + 1 < g.cells[0] {
                assert_eq!(*v, 0.0);
            }
        }
        let lap = laplacian(&d, &u).unwrap();
        for (f, v) in lap.comps[0].iter().enumerate() {
            let i = g.face_multi(0, f);
            let away = i[0] > 1 && i[0] + 1 < g.cells[0] && i[1] > 0 && i[1] + 1 < g.cells[1];
            if m.faces[0][f] && away {
                assert!(v.abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn laplacian_second_order_in_max_norm() {
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let (g, d) = periodic(n);
            let u = VelocityField::from_fn(&g, |x| {
                [
                    (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
                    (2.0 * PI * x[1]).sin(),
                    0.0,
                ]
            });
            let exact = VelocityField::from_fn(&g, |x| {
                [
                    -8.0 * PI * PI * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos(),
                    -4.0 * PI * PI * (2.0 * PI * x[1]).sin(),
                    0.0,
                ]
            });
            let mut lap = laplacian(&d, &u).unwrap();
            lap.add_scaled(-1.0, &exact);
            errs.push(lap.max_abs());
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.1, "order {order}");
        }
    }

    #[test]
    fn duality_on_random_fields() {
        use rand::{Rng, SeedableRng};
        let l = crate::geometry::PerforationLattice::periodic(
            crate::geometry::CellShape::centered_ball(2, 0.3).unwrap(),
        );
        let g = MacGrid::unit(2, 8, 2, Boundary::DirichletBox).unwrap();
        let m = crate::grid::rasterize(&l, &g).unwrap();
        let d = Discretization::new(&g, &m).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = PressureField::from_fn(&g, |_| rng.gen_range(-1.0..1.0));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let u = VelocityField::from_fn(&g, |_| {
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0]
        });
        let lhs = inner_velocity(&d, &grad(&d, &p).unwrap(), &u);
        let rhs = -inner_pressure(&d, &p, &div(&d, &u).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}
