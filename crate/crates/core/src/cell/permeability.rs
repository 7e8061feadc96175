use nalgebra::DMatrix;
use serde::Serialize;

use super::PeriodicCorrectors;
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Debug, Serialize)]
pub struct PermeabilityTensor {
    pub dim: usize,
    /// Symmetric part of `a_velocity`.
    pub a: Vec<Vec<f64>>,
    /// `A_i^j = int w_j . e_i`.
    pub a_velocity: Vec<Vec<f64>>,
    /// `A_i^j = int grad w_i : grad w_j`.
    pub a_energy: Vec<Vec<f64>>,
    /// `max |A_ij - A_ji| / max |A_ij|` of `a_velocity`.
    pub symmetry_defect: f64,
    /// Ascending eigenvalues of `a`.
    pub eigenvalues: Vec<f64>,
}

impl PermeabilityTensor {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest relative entrywise gap between the two evaluations.
    pub fn formula_gap(&self) -> f64 {
        let scale = self.max_abs();
        let mut gap: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                gap = gap.max((self.a_velocity[i][j] - self.a_energy[i][j]).abs());
            }
        }
        gap / scale
    }

    pub fn max_abs(&self) -> f64 {
        self.a
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE)
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.a[i][j])
    }

    /// Rows `i, A_i1..A_id` followed by eigenvalues and symmetry defect.
    pub fn csv_rows(&self) -> (Vec<String>, Vec<Vec<String>>) {
        let mut headers = vec!["row".to_string()];
        for j in 0..self.dim {
            headers.push(format!("a{}", j + 1));
        }
        headers.push("eigenvalue".into());
        headers.push("a_velocity_row".into());
        headers.push("a_energy_row".into());
        headers.push("symmetry_defect".into());
        let rows = (0..self.dim)
            .map(|i| {
                let mut r = vec![(i + 1).to_string()];
                r.extend(self.a[i].iter().map(|v| format!("{v:e}")));
                r.push(format!("{:e}", self.eigenvalues[i]));
                r.push(
                    self.a_velocity[i]
                        .iter()
                        .map(|v| format!("{v:e}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                );
                r.push(
                    self.a_energy[i]
                        .iter()
                        .map(|v| format!("{v:e}"))
                        .collect::<Vec<_>>()
                        .join(" "),
                );
                r.push(format!("{:e}", self.symmetry_defect));
                r
            })
            .collect();
        (headers, rows)
    }
}

/// Both evaluations of the permeability tensor by midpoint quadrature.
pub fn permeability(c: &PeriodicCorrectors) -> Result<PermeabilityTensor> {
    let dim = c.cell.grid.dim;
    if c.w.len() != dim {
        return Err(Error::InconsistentGrids(format!(
            "need {dim} correctors, got {}",
            c.w.len()
        )));
    }
    for w in &c.w {
        w.check(&c.cell.grid)
            .map_err(|_| Error::InconsistentGrids("corrector on a different grid".into()))?;
    }
    let disc = &c.cell.disc;
    let vol = c.cell.grid.cell_volume();
    let dofs: Vec<Vec<f64>> = c.w.iter().map(|w| disc.gather_velocity(w)).collect();
    let lap: Vec<Vec<f64>> = dofs
        .iter()
        .map(|u| {
            let mut out = vec![0.0; u.len()];
            disc.apply_laplacian(u, &mut out);
            out
        })
        .collect();
    let mut a_velocity = vec![vec![0.0; dim]; dim];
    let mut a_energy = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let r = disc.vel_offset[i]..disc.vel_offset[i + 1];
            a_velocity[i][j] = linalg::sum(&dofs[j][r]) * vol;
            a_energy[i][j] = linalg::dot(&dofs[i], &lap[j]) * vol;
        }
    }
    let mut a = vec![vec![0.0; dim]; dim];
    let mut scale: f64 = 0.0;
    let mut defect: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            a[i][j] = 0.5 * (a_velocity[i][j] + a_velocity[j][i]);
            scale = scale.max(a_velocity[i][j].abs());
            defect = defect.max((a_velocity[i][j] - a_velocity[j][i]).abs());
        }
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| a[i][j]);
    let mut eigenvalues: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(PermeabilityTensor {
        dim,
        a,
        a_velocity,
        a_energy,
        symmetry_defect: if scale > 0.0 { defect / scale } else { 0.0 },
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellShape;
    use crate::stokes::SolverConfig;

    #[test]
    fn disk_permeability_properties() {
        let shape = CellShape::centered_ball(2, 0.25).unwrap();
        let c = PeriodicCorrectors::solve(&shape, 16, &SolverConfig::with_rtol(1e-10)).unwrap();
        let k = permeability(&c).unwrap();
        assert!(k.symmetry_defect < 1e-8);
        assert!(k.formula_gap() < 1e-6);
        assert!(k.min_eigenvalue() > 0.0);
        assert!(k.a[0][1].abs() < 1e-8 * k.max_abs());
        assert!((k.a[0][0] - k.a[1][1]).abs() < 1e-8 * k.max_abs());
    }

    #[test]
    fn smaller_hole_is_more_permeable() {
        let cfg = SolverConfig::with_rtol(1e-9);
        let values: Vec<f64> = [0.35, 0.25, 0.15]
            .iter()
            .map(|r| {
                let c =
                    PeriodicCorrectors::solve(&CellShape::centered_ball(2, *r).unwrap(), 16, &cfg)
                        .unwrap();
                permeability(&c).unwrap().a[0][0]
            })
            .collect();
        assert!(values[0] < values[1] && values[1] < values[2], "{values:?}");
    }
}
