use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Ball,
    Ellipsoid,
    Superellipsoid,
}

/// A parametric hole inside the reference cell `Q = (-1/2, 1/2)^d`.
///
/// The hole is the open set `{ y : sum_i |(y_i - c_i) / r_i|^p < 1 }` with
/// `p = 2` for balls and ellipsoids. Coordinates are relative to the cell
/// center. Unused trailing axes (2D) carry zero center and unit radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellShape {
    pub dim: usize,
    pub kind: ShapeKind,
    pub center: [f64; 3],
    pub radii: [f64; 3],
    pub exponent: f64,
}

impl CellShape {
    pub fn new(
        dim: usize,
        kind: ShapeKind,
        center: &[f64],
        radii: &[f64],
        exponent: Option<f64>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGeometry(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if center.len() != dim || radii.len() != dim {
            return Err(Error::InvalidGeometry(format!(
                "center and radii need {dim} entries (got {} and {})",
                center.len(),
                radii.len()
            )));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidGeometry("radii must be positive".into()));
        }
        if center.iter().any(|c| !c.is_finite() || c.abs() >= 0.5) {
            return Err(Error::InvalidGeometry(
                "center must lie in the open unit cell (-1/2, 1/2)^d".into(),
            ));
        }
        let exponent = match kind {
            ShapeKind::Ball => {
                if radii.iter().any(|r| (r - radii[0]).abs() > 1e-15) {
                    return Err(Error::InvalidGeometry("a ball needs equal radii".into()));
                }
                2.0
            }
            ShapeKind::Ellipsoid => 2.0,
            ShapeKind::Superellipsoid => {
                let p = exponent.ok_or_else(|| {
                    Error::InvalidGeometry("superellipsoid requires an exponent".into())
                })?;
                if !(p.is_finite() && p > 0.0) {
                    return Err(Error::InvalidGeometry("exponent must be positive".into()));
                }
                p
            }
        };
        let mut c = [0.0; 3];
        let mut r = [1.0; 3];
        c[..dim].copy_from_slice(center);
        r[..dim].copy_from_slice(radii);
        Ok(Self {
            dim,
            kind,
            center: c,
            radii: r,
            exponent,
        })
    }

    pub fn ball(dim: usize, center: &[f64], radius: f64) -> Result<Self> {
        Self::new(dim, ShapeKind::Ball, center, &vec![radius; dim], None)
    }

    /// Ball of the given radius at the cell center.
    pub fn centered_ball(dim: usize, radius: f64) -> Result<Self> {
        Self::ball(dim, &vec![0.0; dim], radius)
    }

    pub fn translated(&self, delta: &[f64]) -> Result<Self> {
        let center: Vec<f64> = (0..self.dim).map(|i| self.center[i] + delta[i]).collect();
        Self::new(
            self.dim,
            self.kind,
            &center,
            &self.radii[..self.dim],
            Some(self.exponent),
        )
    }

    fn scaled(&self, y: &[f64; 3]) -> [f64; 3] {
        let mut t = [0.0; 3];
        for i in 0..self.dim {
            t[i] = (y[i] - self.center[i]) / self.radii[i];
        }
        t
    }

    /// Level function: negative inside, zero on the boundary.
    pub fn level(&self, y: &[f64; 3]) -> f64 {
        let t = self.scaled(y);
        let p = self.exponent;
        (0..self.dim).map(|i| t[i].abs().powf(p)).sum::<f64>() - 1.0
    }

    pub fn contains(&self, y: &[f64; 3]) -> bool {
        self.level(y) < 0.0
    }

    pub fn level_gradient(&self, y: &[f64; 3]) -> [f64; 3] {
        let t = self.scaled(y);
        let p = self.exponent;
        let mut g = [0.0; 3];
        for i in 0..self.dim {
            g[i] = p * t[i].abs().powf(p - 1.0) * t[i].signum() / self.radii[i];
        }
        g
    }

    /// Diagonal of the level-function Hessian (it is diagonal for this family).
    pub fn level_hessian_diag(&self, y: &[f64; 3]) -> [f64; 3] {
        let t = self.scaled(y);
        let p = self.exponent;
        let mut h = [0.0; 3];
        for i in 0..self.dim {
            h[i] = p * (p - 1.0) * t[i].abs().powf(p - 2.0) / (self.radii[i] * self.radii[i]);
        }
        h
    }

    /// Exact distance from the shape closure to the boundary of `Q`.
    /// Non-positive when the shape touches or crosses the cell boundary.
    pub fn inclusion_margin(&self) -> f64 {
        (0..self.dim)
            .map(|i| 0.5 - (self.center[i].abs() + self.radii[i]))
            .fold(f64::INFINITY, f64::min)
    }

    /// The boundary has C^2 regularity (balls, ellipsoids, superellipsoids
    /// with even integer exponent or exponent >= 2).
    pub fn is_c2(&self) -> bool {
        match self.kind {
            ShapeKind::Ball | ShapeKind::Ellipsoid => true,
            ShapeKind::Superellipsoid => self.exponent >= 2.0,
        }
    }

    /// Lipschitz boundary: convex members of the family (exponent >= 1).
    pub fn is_lipschitz(&self) -> bool {
        self.exponent >= 1.0
    }

    pub fn volume(&self) -> f64 {
        let p = self.exponent;
        let d = self.dim as f64;
        let prod: f64 = self.radii[..self.dim].iter().product();
        // |{sum |t_i|^p < 1}| = (2 Gamma(1 + 1/p))^d / Gamma(1 + d/p)
        (2.0 * gamma(1.0 + 1.0 / p)).powf(d) / gamma(1.0 + d / p) * prod
    }

    /// Boundary points, roughly uniform in the parameter sphere.
    pub fn boundary_samples(&self, count: usize) -> Vec<[f64; 3]> {
        let dirs = sphere_directions(self.dim, count);
        let q = 2.0 / self.exponent;
        dirs.iter()
            .map(|u| {
                let mut x = [0.0; 3];
                for i in 0..self.dim {
                    x[i] = self.center[i] + self.radii[i] * u[i].signum() * u[i].abs().powf(q);
                }
                x
            })
            .collect()
    }

    pub fn is_exact_ball(&self) -> bool {
        self.kind == ShapeKind::Ball
    }
}

/// Unit directions: equispaced angles in 2D, a Fibonacci lattice in 3D.
pub(crate) fn sphere_directions(dim: usize, count: usize) -> Vec<[f64; 3]> {
    let count = count.max(4);
    if dim == 2 {
        (0..count)
            .map(|i| {
                let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / count as f64;
                [th.cos(), th.sin(), 0.0]
            })
            .collect()
    } else {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|i| {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let th = golden * i as f64;
                [rho * th.cos(), rho * th.sin(), z]
            })
            .collect()
    }
}

/// Lanczos approximation of the gamma function (g = 7), accurate to ~1e-15.
pub(crate) fn gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let t = x + 7.5;
        let mut a = COEF[0];
        for (i, c) in COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Distance queries against a shape, exact for balls and sampled otherwise.
pub(crate) struct ShapeDistance<'a> {
    shape: &'a CellShape,
    samples: Vec<[f64; 3]>,
}

impl<'a> ShapeDistance<'a> {
    pub fn new(shape: &'a CellShape) -> Self {
        let samples = if shape.is_exact_ball() {
            Vec::new()
        } else {
            shape.boundary_samples(if shape.dim == 2 { 4096 } else { 20_000 })
        };
        Self { shape, samples }
    }

    fn sampled_boundary_distance(&self, y: &[f64; 3]) -> f64 {
        self.samples
            .iter()
            .map(|b| {
                let mut s = 0.0;
                for i in 0..self.shape.dim {
                    s += (y[i] - b[i]) * (y[i] - b[i]);
                }
                s
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    fn center_distance(&self, y: &[f64; 3]) -> f64 {
        (0..self.shape.dim)
            .map(|i| (y[i] - self.shape.center[i]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `d(y, O)`: zero inside the shape.
    pub fn to_set(&self, y: &[f64; 3]) -> f64 {
        if self.shape.contains(y) {
            return 0.0;
        }
        if self.shape.is_exact_ball() {
            (self.center_distance(y) - self.shape.radii[0]).max(0.0)
        } else {
            self.sampled_boundary_distance(y)
        }
    }

    /// `d(y, boundary of O)`.
    pub fn to_boundary(&self, y: &[f64; 3]) -> f64 {
        if self.shape.is_exact_ball() {
            (self.center_distance(y) - self.shape.radii[0]).abs()
        } else {
            self.sampled_boundary_distance(y)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_membership_and_margin() {
        let s = CellShape::centered_ball(2, 0.25).unwrap();
        assert!(s.contains(&[0.0, 0.0, 0.0]));
        assert!(!s.contains(&[0.5, 0.5, 0.0]));
        assert!((s.inclusion_margin() - 0.25).abs() < 1e-15);
        assert!((s.volume() - std::f64::consts::PI / 16.0).abs() < 1e-12);
    }

    #[test]
    fn margin_matches_boundary_sampling() {
        let s = CellShape::new(
            3,
            ShapeKind::Superellipsoid,
            &[0.05, -0.1, 0.0],
            &[0.2, 0.15, 0.3],
            Some(4.0),
        )
        .unwrap();
        let sampled = s
            .boundary_samples(50_000)
            .iter()
            .map(|x| {
                (0..3)
                    .map(|i| 0.5 - x[i].abs())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(sampled >= s.inclusion_margin() - 1e-12);
        assert!(sampled - s.inclusion_margin() < 1e-3);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(CellShape::ball(2, &[0.6, 0.0], 0.1).is_err());
        assert!(CellShape::new(2, ShapeKind::Ball, &[0.0, 0.0], &[0.1, 0.2], None).is_err());
        assert!(
            CellShape::new(2, ShapeKind::Superellipsoid, &[0.0, 0.0], &[0.1, 0.2], None).is_err()
        );
        assert!(CellShape::ball(4, &[0.0; 4], 0.1).is_err());
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
    }

    #[test]
    fn superellipsoid_volume_matches_sampling() {
        let s = CellShape::new(
            2,
            ShapeKind::Superellipsoid,
            &[0.0, 0.0],
            &[0.3, 0.2],
            Some(4.0),
        )
        .unwrap();
        let m = 800;
        let mut inside = 0usize;
        for i in 0..m {
            for j in 0..m {
                let y = [
                    -0.5 + (i as f64 + 0.5) / m as f64,
                    -0.5 + (j as f64 + 0.5) / m as f64,
                    0.0,
                ];
                if s.contains(&y) {
                    inside += 1;
                }
            }
        }
        let est = inside as f64 / (m * m) as f64;
        assert!((est - s.volume()).abs() < 2e-3);
    }
}
