//! Smooth macroscopic body forces with closed-form derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::grid::{MacGrid, VelocityField};

/// `(1 - t^2)^5` expanded in powers of `t`.
const BUMP: [f64; 11] = [1.0, 0.0, -5.0, 0.0, 10.0, 0.0, -10.0, 0.0, 5.0, 0.0, -1.0];

fn bump_1d(t: f64, order: usize) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let mut c = BUMP.to_vec();
    for _ in 0..order {
        c = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| k as f64 * v)
            .collect();
        if c.is_empty() {
            return 0.0;
        }
    }
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceField {
    Constant {
        value: Vec<f64>,
    },
    /// `curl(psi axis)` in 3D, `(d_y psi, -d_x psi)` in 2D, with the tensor
    /// bump `psi = amplitude prod (1 - t_i^2)^5`, `t_i = (x_i - c_i) / radius`.
    CurlBump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
        #[serde(default)]
        axis: Option<Vec<f64>>,
    },
    /// `grad psi` for the same bump.
    GradientBump {
        center: Vec<f64>,
        radius: f64,
        amplitude: f64,
    },
    /// `f_a = amplitude_a sin(pi k x_{a+1})`, divergence free.
    Trig {
        amplitude: Vec<f64>,
        wavenumber: f64,
    },
}

impl ForceField {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let len_ok = |v: &[f64]| v.len() == dim;
        let ok = match self {
            ForceField::Constant { value } => len_ok(value),
            ForceField::CurlBump {
                center,
                radius,
                axis,
                ..
            } => {
                len_ok(center)
                    && *radius > 0.0
                    && match (dim, axis) {
                        (2, None) => true,
                        (3, Some(a)) => a.len() == 3,
                        (3, None) => false,
                        _ => false,
                    }
            }
            ForceField::GradientBump { center, radius, .. } => len_ok(center) && *radius > 0.0,
            ForceField::Trig {
                amplitude,
                wavenumber,
            } => len_ok(amplitude) && wavenumber.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "force field does not fit dimension {dim}: {self:?}"
            )))
        }
    }

    /// `d^alpha psi` for the bump kinds.
    fn psi(&self, alpha: [usize; 3], x: &[f64; 3], dim: usize) -> f64 {
        let (center, radius, amplitude) = match self {
            ForceField::CurlBump {
                center,
                radius,
                amplitude,
                ..
            }
            | ForceField::GradientBump {
                center,
                radius,
                amplitude,
            } => (center, *radius, *amplitude),
            _ => return 0.0,
        };
        let mut v = amplitude;
        for a in 0..dim {
            let t = (x[a] - center[a]) / radius;
            v *= bump_1d(t, alpha[a]) / radius.powi(alpha[a] as i32);
            if v == 0.0 {
                return 0.0;
            }
        }
        v
    }

    /// `d^alpha f_comp (x)`.
    pub fn derivative(&self, dim: usize, comp: usize, alpha: [usize; 3], x: &[f64; 3]) -> f64 {
        let with = |mut al: [usize; 3], b: usize| {
            al[b] += 1;
            al
        };
        match self {
            ForceField::Constant { value } => {
                if alpha.iter().all(|v| *v == 0) {
                    value[comp]
                } else {
                    0.0
                }
            }
            ForceField::GradientBump { .. } => self.psi(with(alpha, comp), x, dim),
            ForceField::CurlBump { axis, .. } => {
                if dim == 2 {
                    match comp {
                        0 => self.psi(with(alpha, 1), x, dim),
                        _ => -self.psi(with(alpha, 0), x, dim),
                    }
                } else {
                    let ax = axis.as_ref().expect("validated");
                    let (p, q) = ((comp + 1) % 3, (comp + 2) % 3);
                    // (grad psi x a)_c = d_p psi a_q - d_q psi a_p
                    self.psi(with(alpha, p), x, dim) * ax[q]
                        - self.psi(with(alpha, q), x, dim) * ax[p]
                }
            }
            ForceField::Trig {
                amplitude,
                wavenumber,
            } => {
                let b = (comp + 1) % dim;
                if (0..dim).any(|c| c != b && alpha[c] > 0) {
                    return 0.0;
                }
                let k = std::f64::consts::PI * wavenumber;
                let order = alpha[b];
                let phase = k * x[b] + order as f64 * std::f64::consts::FRAC_PI_2;
                amplitude[comp] * k.powi(order as i32) * phase.sin()
            }
        }
    }

    pub fn value(&self, dim: usize, x: &[f64; 3]) -> [f64; 3] {
        let mut f = [0.0; 3];
        for (c, v) in f.iter_mut().enumerate().take(dim) {
            *v = self.derivative(dim, c, [0; 3], x);
        }
        f
    }

    /// `d_i f_comp` for `i < dim`.
    pub fn gradient(&self, dim: usize, comp: usize, x: &[f64; 3]) -> [f64; 3] {
        let mut g = [0.0; 3];
        for (i, v) in g.iter_mut().enumerate().take(dim) {
            let mut al = [0; 3];
            al[i] = 1;
            *v = self.derivative(dim, comp, al, x);
        }
        g
    }

    /// Point values at the face midpoints.
    pub fn sample(&self, grid: &MacGrid) -> VelocityField {
        let dim = grid.dim;
        let mut out = VelocityField::zeros(grid);
        for a in 0..dim {
            for (f, v) in out.comps[a].iter_mut().enumerate() {
                let x = grid.face_center(a, grid.face_multi(a, f));
                *v = self.derivative(dim, a, [0; 3], &x);
            }
        }
        out
    }

    /// Mean normal component over the face of side `h` centered at `x`
    /// normal to `a`. For curl fields this is the circulation of `psi`
    /// around the face, so face fluxes of every cell sum to zero exactly.
    pub fn face_average(&self, dim: usize, a: usize, x: &[f64; 3], h: f64) -> f64 {
        let ForceField::CurlBump { axis, .. } = self else {
            return self.derivative(dim, a, [0; 3], x);
        };
        if dim == 2 {
            // f_0 = d_1 psi, f_1 = -d_0 psi
            let b = 1 - a;
            let mut hi = *x;
            let mut lo = *x;
            hi[b] += 0.5 * h;
            lo[b] -= 0.5 * h;
            let diff = (self.psi([0; 3], &hi, dim) - self.psi([0; 3], &lo, dim)) / h;
            return if a == 0 { diff } else { -diff };
        }
        let ax = axis.as_ref().expect("validated");
        let (p, q) = ((a + 1) % 3, (a + 2) % 3);
        // circulation of psi * axis around the face, edges by 5-point Gauss
        let edge = |fixed: usize, side: f64, along: usize| -> f64 {
            let nodes = [
                (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
                (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.0, 0.568_888_888_888_888_9),
                (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
                (0.906_179_845_938_664, 0.236_926_885_056_189_1),
            ];
            let mut s = 0.0;
            for (t, w) in nodes {
                let mut y = *x;
                y[fixed] += side * 0.5 * h;
                y[along] += t * 0.5 * h;
                s += w * self.psi([0; 3], &y, dim);
            }
            s * 0.5 * h * ax[along]
        };
        let circ = edge(q, -1.0, p) + edge(p, 1.0, q) - edge(q, 1.0, p) - edge(p, -1.0, q);
        circ / (h * h)
    }

    /// Distance from the support to the box boundary, for compactly
    /// supported fields.
    pub fn support_margin(&self, domain: &DomainSpec) -> Option<f64> {
        match self {
            ForceField::CurlBump { center, radius, .. }
            | ForceField::GradientBump { center, radius, .. } => {
                let mut m = f64::INFINITY;
                for a in 0..domain.dim {
                    let lo = center[a] - radius - domain.origin[a];
                    let hi = domain.origin[a] + domain.lengths[a] - center[a] - radius;
                    m = m.min(lo).min(hi);
                }
                Some(m)
            }
            _ => None,
        }
    }

    pub fn is_divergence_free(&self) -> bool {
        !matches!(self, ForceField::GradientBump { .. })
    }
}
