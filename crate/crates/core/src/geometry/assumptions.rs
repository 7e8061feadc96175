use serde::Serialize;

use super::lattice::{CellIndex, PerforationLattice};
use super::shape::{CellShape, ShapeDistance};
use crate::error::{Error, Result};

/// Upper bound on the boundary regularity proxies accepted as "uniform".
pub const DEFAULT_REGULARITY_BOUND: f64 = 1.0e3;

/// Absolute slack used when comparing a declared alpha with the measured one.
const ALPHA_TOLERANCE: f64 = 5e-3;

fn adaptive_measure<F: Fn(&[f64; 3]) -> bool>(
    dim: usize,
    pred: &F,
    lo: [f64; 3],
    hi: [f64; 3],
    depth: u32,
    min_depth: u32,
    max_depth: u32,
) -> f64 {
    let vol: f64 = (0..dim).map(|i| hi[i] - lo[i]).product();
    let corners = 1usize << dim;
    let mut hits = 0usize;
    let mut total = 0usize;
    for c in 0..corners {
        let mut p = [0.0; 3];
        for i in 0..dim {
            p[i] = if c >> i & 1 == 1 { hi[i] } else { lo[i] };
        }
        hits += pred(&p) as usize;
        total += 1;
    }
    let mut mid = [0.0; 3];
    for i in 0..dim {
        mid[i] = 0.5 * (lo[i] + hi[i]);
    }
    let mid_in = pred(&mid);
    hits += mid_in as usize;
    total += 1;
    if depth >= min_depth && (hits == 0 || hits == total) {
        return if hits == 0 { 0.0 } else { vol };
    }
    if depth >= max_depth {
        return vol * hits as f64 / total as f64;
    }
    let mut acc = 0.0;
    for c in 0..corners {
        let mut l = [0.0; 3];
        let mut h = [0.0; 3];
        for i in 0..dim {
            if c >> i & 1 == 1 {
                l[i] = mid[i];
                h[i] = hi[i];
            } else {
                l[i] = lo[i];
                h[i] = mid[i];
            }
        }
        acc += adaptive_measure(dim, pred, l, h, depth + 1, min_depth, max_depth);
    }
    acc
}

/// `|O_k Δ O_k^per|` inside the reference cell, by adaptive subdivision.
pub fn cell_symdiff(dim: usize, hole: Option<&CellShape>, periodic: &CellShape) -> f64 {
    let pred = |y: &[f64; 3]| {
        let a = hole.map(|s| s.contains(y)).unwrap_or(false);
        a != periodic.contains(y)
    };
    // thin crescents slip between the samples of coarse boxes
    let (min_depth, max_depth) = if dim == 2 { (7, 14) } else { (5, 9) };
    adaptive_measure(dim, &pred, [-0.5; 3], [0.5; 3], 0, min_depth, max_depth)
}

/// Sum over all cells of the symmetric difference between the perturbed and
/// periodic holes. Only overridden cells contribute.
pub fn symdiff_volume(lattice: &PerforationLattice) -> f64 {
    lattice
        .perturbation
        .overrides
        .keys()
        .map(|k| {
            let hole = lattice.hole(k);
            cell_symdiff(lattice.dim, hole.as_deref(), &lattice.base_shape)
        })
        .sum()
}

/// Smallest `alpha` with `O^{per,-}(alpha) ⊂ O_k ⊂ O^{per,+}(alpha)`.
pub fn perturbation_magnitude(dim: usize, hole: Option<&CellShape>, periodic: &CellShape) -> f64 {
    let dist = ShapeDistance::new(periodic);
    // outer inclusion: sup over O_k of d(., O^per); attained on the boundary (convex family)
    let outer = match hole {
        Some(s) => s
            .boundary_samples(if dim == 2 { 4096 } else { 4000 })
            .iter()
            .map(|x| dist.to_set(x))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    // inner inclusion: sup over O^per \ O_k of d(., ∂O^per)
    let per_axis = if dim == 2 {
        400
    } else if periodic.is_exact_ball() {
        80
    } else {
        32
    };
    let mut inner: f64 = 0.0;
    let count = if dim == 2 {
        per_axis * per_axis
    } else {
        per_axis * per_axis * per_axis
    };
    for idx in 0..count {
        let mut y = [0.0; 3];
        let mut rem = idx;
        for i in 0..dim {
            let t = (rem % per_axis) as f64;
            rem /= per_axis;
            let r = periodic.radii[i];
            y[i] = periodic.center[i] - r + 2.0 * r * (t + 0.5) / per_axis as f64;
        }
        if !periodic.contains(&y) {
            continue;
        }
        if hole.map(|s| s.contains(&y)).unwrap_or(false) {
            continue;
        }
        inner = inner.max(dist.to_boundary(&y));
    }
    outer.max(inner)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegularityProxies {
    /// max |∇F| / min |∇F| over boundary samples of the level function.
    pub gradient_ratio: f64,
    /// Largest boundary curvature over the samples.
    pub max_curvature: f64,
}

pub fn regularity_proxies(shape: &CellShape) -> RegularityProxies {
    let samples = shape.boundary_samples(if shape.dim == 2 { 2000 } else { 5000 });
    let mut gmin = f64::INFINITY;
    let mut gmax: f64 = 0.0;
    let mut kmax: f64 = 0.0;
    for y in &samples {
        let g = shape.level_gradient(y);
        let h = shape.level_hessian_diag(y);
        let gn = (0..shape.dim).map(|i| g[i] * g[i]).sum::<f64>().sqrt();
        gmin = gmin.min(gn);
        gmax = gmax.max(gn);
        let kappa = if shape.dim == 2 {
            (h[0] * g[1] * g[1] + h[1] * g[0] * g[0]).abs() / gn.powi(3)
        } else {
            // spectral norm of P H P / |∇F| with P the tangent projector
            let n = nalgebra::Vector3::new(g[0] / gn, g[1] / gn, g[2] / gn);
            let p = nalgebra::Matrix3::identity() - n * n.transpose();
            let hm = nalgebra::Matrix3::from_diagonal(&nalgebra::Vector3::new(h[0], h[1], h[2]));
            let m = p * hm * p;
            let eig = m.symmetric_eigenvalues();
            eig.iter().fold(0.0f64, |a, v| a.max(v.abs())) / gn
        };
        kmax = if kappa.is_finite() {
            kmax.max(kappa)
        } else {
            f64::INFINITY
        };
    }
    let gradient_ratio = if gmin > 0.0 && gmax.is_finite() {
        gmax / gmin
    } else {
        f64::INFINITY
    };
    RegularityProxies {
        gradient_ratio,
        max_curvature: kmax,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellAssumptions {
    /// `None` stands for every unperturbed (periodic) cell.
    pub k: Option<CellIndex>,
    pub removed: bool,
    pub inclusion_margin: f64,
    pub alpha: f64,
    pub declared_alpha: Option<f64>,
    pub regularity: Option<RegularityProxies>,
    pub lipschitz: bool,
    pub c2: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssumptionReport {
    pub cells: Vec<CellAssumptions>,
    pub min_inclusion_margin: f64,
    pub alpha_sum: f64,
    pub symdiff_volume: f64,
    pub regularity_bound: f64,
    pub a1_inclusion: bool,
    pub a2_lipschitz: bool,
    pub a3_chain_inclusion: bool,
    pub a4_prime_lipschitz_uniform: bool,
    pub a5_prime_c2_uniform: bool,
    /// `(Q'+k) ∩ O = (Q''+k) ∩ O = O_k` for every cell.
    pub frame_isolation: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.a1_inclusion
            && self.a2_lipschitz
            && self.a3_chain_inclusion
            && self.a4_prime_lipschitz_uniform
            && self.a5_prime_c2_uniform
            && self.frame_isolation
    }

    /// First violated assumption, naming the offending cell.
    pub fn first_violation(&self, lattice: &PerforationLattice) -> Option<Error> {
        let frame = lattice.frame_margins;
        for c in &self.cells {
            let k = c.k.unwrap_or([0; 3]);
            let bad = |assumption: &'static str, detail: String| Error::AssumptionViolated {
                k,
                assumption,
                detail,
            };
            if !c.removed && c.inclusion_margin <= 0.0 {
                return Some(bad(
                    "A1",
                    format!("inclusion margin {:.4} <= 0", c.inclusion_margin),
                ));
            }
            if !c.removed && !c.lipschitz {
                return Some(bad("A2", "boundary is not Lipschitz (exponent < 1)".into()));
            }
            if let Some(d) = c.declared_alpha {
                if d + ALPHA_TOLERANCE < c.alpha {
                    return Some(bad(
                        "A3",
                        format!("declared alpha {d:.4} below measured {:.4}", c.alpha),
                    ));
                }
            }
            if let Some(r) = &c.regularity {
                if !(r.gradient_ratio <= self.regularity_bound) {
                    return Some(bad(
                        "A4'",
                        format!("gradient ratio {:.3e}", r.gradient_ratio),
                    ));
                }
                if !c.c2 || !(r.max_curvature <= self.regularity_bound) {
                    return Some(bad("A5'", format!("curvature {:.3e}", r.max_curvature)));
                }
            }
            let needed = frame.inset.max(frame.outset);
            if !c.removed && c.inclusion_margin <= needed {
                return Some(bad(
                    "frame",
                    format!(
                        "hole reaches within {:.4} of the cell boundary",
                        c.inclusion_margin
                    ),
                ));
            }
        }
        None
    }

    pub fn into_result(self, lattice: &PerforationLattice) -> Result<Self> {
        match self.first_violation(lattice) {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

fn assess(
    dim: usize,
    k: Option<CellIndex>,
    hole: Option<&CellShape>,
    periodic: &CellShape,
    declared: Option<f64>,
) -> CellAssumptions {
    let alpha = if k.is_some() {
        perturbation_magnitude(dim, hole, periodic)
    } else {
        0.0
    };
    match hole {
        Some(s) => CellAssumptions {
            k,
            removed: false,
            inclusion_margin: s.inclusion_margin(),
            alpha,
            declared_alpha: declared,
            regularity: Some(regularity_proxies(s)),
            lipschitz: s.is_lipschitz(),
            c2: s.is_c2(),
        },
        None => CellAssumptions {
            k,
            removed: true,
            inclusion_margin: 0.5,
            alpha,
            declared_alpha: declared,
            regularity: None,
            lipschitz: true,
            c2: true,
        },
    }
}

/// Check the geometric assumptions on every distinct cell of the lattice.
pub fn validate_assumptions(lattice: &PerforationLattice) -> AssumptionReport {
    validate_assumptions_with_bound(lattice, DEFAULT_REGULARITY_BOUND)
}

pub fn validate_assumptions_with_bound(
    lattice: &PerforationLattice,
    regularity_bound: f64,
) -> AssumptionReport {
    let dim = lattice.dim;
    let base = &lattice.base_shape;
    let mut cells = vec![assess(dim, None, Some(base), base, None)];
    for k in lattice.perturbation.overrides.keys() {
        let hole = lattice.hole(k);
        let declared = lattice.perturbation.declared_alpha.get(k).copied();
        cells.push(assess(dim, Some(*k), hole.as_deref(), base, declared));
    }
    let frame = lattice.frame_margins;
    let present = || cells.iter().filter(|c| !c.removed);
    let min_inclusion_margin = present().map(|c| c.inclusion_margin).fold(0.5, f64::min);
    let a1_inclusion = present().all(|c| c.inclusion_margin > 0.0);
    let a2_lipschitz = present().all(|c| c.lipschitz);
    let a3_chain_inclusion = cells.iter().all(|c| match c.declared_alpha {
        Some(d) => d + ALPHA_TOLERANCE >= c.alpha,
        None => c.alpha.is_finite(),
    });
    let a4 = present().all(|c| {
        c.regularity
            .map(|r| r.gradient_ratio <= regularity_bound)
            .unwrap_or(true)
    });
    let a5 = present().all(|c| {
        c.c2 && c
            .regularity
            .map(|r| r.max_curvature <= regularity_bound)
            .unwrap_or(true)
    });
    let frame_isolation = present().all(|c| c.inclusion_margin > frame.inset.max(frame.outset));
    let alpha_sum = cells.iter().map(|c| c.alpha).sum();
    AssumptionReport {
        symdiff_volume: symdiff_volume(lattice),
        cells,
        min_inclusion_margin,
        alpha_sum,
        regularity_bound,
        a1_inclusion,
        a2_lipschitz,
        a3_chain_inclusion,
        a4_prime_lipschitz_uniform: a4,
        a5_prime_c2_uniform: a5,
        frame_isolation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lattice::{Override, PerturbationSpec};
    use crate::geometry::shape::ShapeKind;

    fn disk() -> CellShape {
        CellShape::centered_ball(2, 0.25).unwrap()
    }

    #[test]
    fn unperturbed_lattice_passes() {
        let l = PerforationLattice::periodic(disk());
        let r = validate_assumptions(&l);
        assert!(r.all_pass());
        assert_eq!(r.alpha_sum, 0.0);
        assert_eq!(r.symdiff_volume, 0.0);
        assert!(r.first_violation(&l).is_none());
    }

    #[test]
    fn removal_symdiff_is_disk_area() {
        let l = PerforationLattice::new(
            disk(),
            PerturbationSpec::none().with([0, 0, 0], Override::Remove),
            Default::default(),
        )
        .unwrap();
        let v = symdiff_volume(&l);
        assert!((v - std::f64::consts::PI / 16.0).abs() < 1e-4, "{v}");
        let r = validate_assumptions(&l);
        assert!(r.all_pass());
        assert!((r.alpha_sum - 0.25).abs() < 5e-3);
    }

    #[test]
    fn touching_replacement_fails_a1() {
        let touching = CellShape::ball(2, &[0.25, 0.0], 0.25).unwrap();
        let l = PerforationLattice::new(
            disk(),
            PerturbationSpec::none().with([2, -1, 0], Override::Replace(touching)),
            Default::default(),
        )
        .unwrap();
        let r = validate_assumptions(&l);
        assert!(!r.a1_inclusion);
        match r.first_violation(&l) {
            Some(Error::AssumptionViolated { k, assumption, .. }) => {
                assert_eq!(k, [2, -1, 0]);
                assert_eq!(assumption, "A1");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn translated_ball_alpha_equals_shift() {
        // dense boundary-sampling oracle: outer = max over the shifted circle of the
        // distance to the original disk, inner = max depth of uncovered points
        let r = 0.25;
        let shift = 0.1;
        let mut outer: f64 = 0.0;
        let mut inner: f64 = 0.0;
        let m = 20_000;
        for i in 0..m {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            let (x, y) = (shift + r * th.cos(), r * th.sin());
            outer = outer.max((x.hypot(y) - r).max(0.0));
            for s in 0..200 {
                let rho = r * s as f64 / 200.0;
                let (px, py) = (rho * th.cos(), rho * th.sin());
                if (px - shift).hypot(py) >= r {
                    inner = inner.max(r - rho);
                }
            }
        }
        let oracle = outer.max(inner);
        assert!((oracle - shift).abs() < 2e-3);

        let l = PerforationLattice::new(
            disk(),
            PerturbationSpec::none().with([1, 0, 0], Override::Translate([shift, 0.0, 0.0])),
            Default::default(),
        )
        .unwrap();
        let rep = validate_assumptions(&l);
        let a = rep
            .cells
            .iter()
            .find(|c| c.k == Some([1, 0, 0]))
            .unwrap()
            .alpha;
        assert!((a - oracle).abs() < 5e-3, "alpha {a} oracle {oracle}");
        assert!(rep.all_pass());
    }

    #[test]
    fn rough_superellipsoid_fails_c2() {
        let s = CellShape::new(
            2,
            ShapeKind::Superellipsoid,
            &[0.0, 0.0],
            &[0.2, 0.2],
            Some(1.5),
        )
        .unwrap();
        let l = PerforationLattice::new(
            disk(),
            PerturbationSpec::none().with([0, 0, 0], Override::Replace(s)),
            Default::default(),
        )
        .unwrap();
        let r = validate_assumptions(&l);
        assert!(r.a2_lipschitz);
        assert!(!r.a5_prime_c2_uniform);
    }

    #[test]
    fn regularity_of_ball() {
        let p = regularity_proxies(&CellShape::centered_ball(3, 0.25).unwrap());
        assert!((p.gradient_ratio - 1.0).abs() < 1e-9);
        assert!((p.max_curvature - 4.0).abs() < 1e-6);
    }
}
