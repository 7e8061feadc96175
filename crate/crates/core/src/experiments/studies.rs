use super::report::{Fingerprint, StudyReport, Value};
use super::spec::{StudyKind, StudySpec};
use crate::cell::{
    corrector_pressure_stats, h1_difference_on_subbox, permeability, solve_corrector_on_box,
    solve_truncated_corrector, CorrectorSet, PeriodicCorrectors, PermeabilityTensor,
};
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, PerforationLattice};
use crate::grid::norms::{pressure_norm, velocity_norm};
use crate::grid::{rasterize, Boundary, FluidMask, MacGrid, NormKind, PressureField};
use crate::homogenization::{
    corrected_velocity, divergence_correctors, divergence_l2, reconstruct_first_order, remainder,
    solve_darcy, tensor3, ForceField, MacroPressure,
};
use crate::stokes::{
    divergence_lift, smallest_poincare_eigenvalue, solve_stokes, StokesProblem, StokesSolution,
};

fn fingerprint(spec: &StudySpec, lattice: &PerforationLattice) -> Fingerprint {
    Fingerprint {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        arch: std::env::consts::ARCH.to_string(),
        os: std::env::consts::OS.to_string(),
        spec_hash: format!(
            "{:016x}",
            crate::geometry::lattice::fnv1a(spec.source.as_bytes())
        ),
        lattice_hash: format!("{:016x}", lattice.fingerprint()),
    }
}

fn macro_grid(
    lattice: &PerforationLattice,
    n: usize,
    m: usize,
    margin: f64,
) -> Result<(MacGrid, FluidMask)> {
    let grid = MacGrid::new(
        n,
        m,
        DomainSpec::unit(lattice.dim, margin)?,
        Boundary::DirichletBox,
    )?;
    let mask = rasterize(lattice, &grid)?;
    Ok((grid, mask))
}

fn stokes(
    report: &mut StudyReport,
    label: String,
    grid: &MacGrid,
    mask: &FluidMask,
    force: &ForceField,
    spec: &StudySpec,
) -> Result<StokesSolution> {
    let prob = StokesProblem::new(grid.clone(), mask.clone(), force.sample(grid))?;
    let sol = solve_stokes(&prob, &spec.solver)?;
    report.logs.push((label, sol.stats.log_text()));
    Ok(sol)
}

/// Cell correctors seen from a macroscopic box at scale `1/m`: periodic for
/// an unperturbed lattice, otherwise solved on `(1/eps) Omega` plus a margin.
fn corrector_set(
    lattice: &PerforationLattice,
    per: &PeriodicCorrectors,
    m: usize,
    spec: &StudySpec,
) -> Result<CorrectorSet> {
    if lattice.is_periodic() {
        return Ok(CorrectorSet::from_periodic(per));
    }
    let mc = spec.margin_cells as i64;
    let mut lo = [0i64; 3];
    let mut hi = [0i64; 3];
    for a in 0..lattice.dim {
        lo[a] = -mc;
        hi[a] = m as i64 - 1 + mc;
    }
    let parts = (0..lattice.dim)
        .map(|j| solve_corrector_on_box(lattice, lo, hi, per, j, &spec.corrector_solver, false))
        .collect::<Result<Vec<_>>>()?;
    CorrectorSet::from_truncated(parts)
}

fn is_isotropic(perm: &PermeabilityTensor) -> bool {
    let s = perm.max_abs();
    (0..perm.dim).all(|i| {
        (0..perm.dim).all(|j| {
            let target = if i == j { perm.a[0][0] } else { 0.0 };
            (perm.a[i][j] - target).abs() <= 1e-8 * s
        })
    })
}

fn require_compact_solenoidal_force(spec: &StudySpec, force: &ForceField, dim: usize) -> Result<()> {
    force.validate(dim)?;
    match force.support_margin(&DomainSpec::unit(dim, 0.0)?) {
        Some(m) if m > 0.0 => {}
        _ => {
            return Err(Error::config(format!(
                "{} study needs a force compactly supported inside the box",
                spec.kind.as_str()
            )))
        }
    }
    if !force.is_divergence_free() {
        return Err(Error::config(format!(
            "{} study needs a divergence-free force",
            spec.kind.as_str()
        )));
    }
    Ok(())
}

fn nan() -> Value {
    Value::Num(f64::NAN)
}

pub fn run_convergence_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let dim = lattice.dim;
    let force = spec.force()?;
    require_compact_solenoidal_force(spec, force, dim)?;
    let min_slope = spec.tolerance(spec.tolerances.min_slope, "min_slope")?;
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &[
            "epsilon",
            "n",
            "lattice_hash",
            "l2",
            "h1",
            "h2_interior",
            "pressure_quotient",
            "pressure_h1_interior",
            "scaled_l2",
            "scaled_h1",
            "scaled_h2",
            "divergence",
            "corrected_divergence",
            "max_grad_p0",
            "iterations",
            "inner_iterations",
        ],
        fingerprint(spec, &lattice),
    );
    report.tolerance("min_slope", min_slope);
    if dim == 2 {
        report.notes.push("two-dimensional run: exploratory".into());
    }
    let per = PeriodicCorrectors::solve(&lattice.base_shape, spec.n, &spec.corrector_solver)?;
    let perm = permeability(&per)?;
    let zc = if is_isotropic(&perm) {
        Some(divergence_correctors(
            &per,
            &perm,
            &lattice.frame_margins,
            &spec.corrector_solver,
        )?)
    } else {
        report.notes.push(
            "permeability is not isotropic: div(A f) is resolved through the Darcy pressure".into(),
        );
        None
    };
    let hash = format!("{:016x}", lattice.fingerprint());
    for m in spec.scales() {
        let eps = 1.0 / m as f64;
        let (grid, mask) = macro_grid(&lattice, spec.n, m, spec.interior_margin)?;
        let darcy = solve_darcy(tensor3(&perm.a), force, &grid, &spec.solver)?;
        let flat = darcy.max_grad_p0() <= 1e-8;
        let p0 = if flat {
            MacroPressure::Zero
        } else {
            MacroPressure::Darcy(&darcy)
        };
        let set = corrector_set(&lattice, &per, m, spec)?;
        let sol = stokes(
            &mut report,
            format!("stokes eps={eps}"),
            &grid,
            &mask,
            force,
            spec,
        )?;
        let first = reconstruct_first_order(&set, force, p0, &grid, &mask)?;
        let rep = remainder(
            "plain",
            &grid,
            &mask,
            &sol.velocity,
            &sol.pressure,
            &first.u1,
            &first.p1,
            spec.interior_margin,
        )?;
        let (div_plain, div_hat) = match (&zc, flat, lattice.is_periodic()) {
            (Some(z), true, true) => {
                let hat = corrected_velocity(&first, z, force, &grid, &mask)?;
                (
                    divergence_l2(&grid, &mask, &first.u1)?,
                    divergence_l2(&grid, &mask, &hat)?,
                )
            }
            _ => (divergence_l2(&grid, &mask, &first.u1)?, f64::NAN),
        };
        let s = rep.scaled();
        report.push_row(vec![
            eps.into(),
            spec.n.into(),
            Value::Text(hash.clone()),
            rep.l2.into(),
            rep.h1.into(),
            rep.h2_interior.into(),
            rep.pressure_quotient.into(),
            rep.pressure_h1_interior.into(),
            s[0].into(),
            s[1].into(),
            s[2].into(),
            div_plain.into(),
            div_hat.into(),
            darcy.max_grad_p0().into(),
            sol.stats.iterations.into(),
            sol.stats.inner_iterations.into(),
        ]);
    }
    let eps = report.column("epsilon").expect("column");
    if eps.len() >= 2 {
        for q in [
            "scaled_l2",
            "scaled_h1",
            "scaled_h2",
            "pressure_quotient",
            "pressure_h1_interior",
        ] {
            let y = report.column(q).expect("column");
            let fit = report.fit(q, &eps, &y)?;
            report.check_min(&format!("slope {q}"), fit.slope, min_slope);
        }
    }
    if let Some(max) = spec.tolerances.max_divergence_ratio {
        report.tolerance("max_divergence_ratio", max);
        let plain = report.column("divergence").expect("column");
        let hat = report.column("corrected_divergence").expect("column");
        let r = hat.last().copied().unwrap_or(f64::NAN) / plain.last().copied().unwrap_or(f64::NAN);
        report.check(
            "corrected / plain divergence at the finest epsilon",
            r,
            format!("<= {max}"),
            r <= max,
        );
    }
    Ok(report)
}

/// `||D^2 u|| + ||grad u|| / eps + ||u|| / eps^2 + ||grad p|| + ||p||_{L^2/R}`
/// over `||f||`, with the second-order norms on the interior region.
fn uniform_ratio(
    grid: &MacGrid,
    mask: &FluidMask,
    sol: &StokesSolution,
    force: &ForceField,
    margin: f64,
) -> Result<[f64; 6]> {
    let eps = grid.epsilon();
    let h2 = velocity_norm(grid, mask, &sol.velocity, NormKind::H2Interior, margin)?;
    let h1 = velocity_norm(grid, mask, &sol.velocity, NormKind::H1Semi, 0.0)?;
    let l2 = velocity_norm(grid, mask, &sol.velocity, NormKind::L2, 0.0)?;
    let gp = pressure_norm(grid, mask, &sol.pressure, NormKind::H1SemiInterior, margin)?;
    let pq = pressure_norm(grid, mask, &sol.pressure, NormKind::L2Quotient, 0.0)?;
    let fl2 = velocity_norm(grid, mask, &force.sample(grid), NormKind::L2, 0.0)?;
    if fl2 == 0.0 {
        return Err(Error::config("force vanishes on the fluid domain"));
    }
    let ratio = (h2 + h1 / eps + l2 / (eps * eps) + gp + pq) / fl2;
    Ok([h2, h1 / eps, l2 / (eps * eps), gp, pq, ratio])
}

pub fn run_uniform_estimate_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let force = spec.force()?;
    force.validate(lattice.dim)?;
    let max_variation = spec.tolerance(spec.tolerances.max_variation, "max_variation")?;
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &[
            "lattice",
            "epsilon",
            "n",
            "lattice_hash",
            "h2_interior",
            "scaled_h1",
            "scaled_l2",
            "pressure_h1_interior",
            "pressure_quotient",
            "ratio",
            "iterations",
        ],
        fingerprint(spec, &lattice),
    );
    report.tolerance("max_variation", max_variation);
    let mut runs = vec![("primary", lattice.clone())];
    if let Some(l) = spec.compare_lattice()? {
        runs.push(("compare", l));
    }
    let mut ratios: Vec<Vec<f64>> = Vec::new();
    for (label, lat) in &runs {
        let mut r = Vec::new();
        for m in spec.scales() {
            let eps = 1.0 / m as f64;
            let (grid, mask) = macro_grid(lat, spec.n, m, spec.interior_margin)?;
            let sol = stokes(
                &mut report,
                format!("{label} eps={eps}"),
                &grid,
                &mask,
                force,
                spec,
            )?;
            let t = uniform_ratio(&grid, &mask, &sol, force, spec.interior_margin)?;
            r.push(t[5]);
            let mut row: Vec<Value> = vec![
                (*label).into(),
                eps.into(),
                spec.n.into(),
                Value::Text(format!("{:016x}", lat.fingerprint())),
            ];
            row.extend(t.iter().map(|v| Value::Num(*v)));
            row.push(sol.stats.iterations.into());
            report.push_row(row);
        }
        let max = r.iter().cloned().fold(f64::MIN, f64::max);
        let min = r.iter().cloned().fold(f64::MAX, f64::min);
        report.check_max(&format!("{label} ratio max/min"), max / min, max_variation);
        ratios.push(r);
    }
    if let (Some(tol), 2) = (spec.tolerances.max_lattice_ratio, ratios.len()) {
        report.tolerance("max_lattice_ratio", tol);
        let worst = ratios[0]
            .iter()
            .zip(&ratios[1])
            .map(|(a, b)| (b / a).max(a / b))
            .fold(1.0, f64::max);
        report.check_max("compare / primary ratio", worst, tol);
    }
    Ok(report)
}

pub fn run_poincare_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let dim = lattice.dim;
    let target = spec.tolerance(spec.tolerances.target_slope, "target_slope")?;
    let tol = spec.tolerance(spec.tolerances.slope_tolerance, "slope_tolerance")?;
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &[
            "epsilon",
            "n",
            "lambda_min",
            "poincare_constant",
            "iterations",
            "inner_iterations",
        ],
        fingerprint(spec, &lattice),
    );
    report.tolerance("target_slope", target);
    report.tolerance("slope_tolerance", tol);
    for m in spec.scales() {
        let (grid, mask) = macro_grid(&lattice, spec.n, m, spec.interior_margin)?;
        let est = smallest_poincare_eigenvalue(&grid, &mask, &spec.eigen)?;
        report.push_row(vec![
            (1.0 / m as f64).into(),
            spec.n.into(),
            est.lambda_min.into(),
            est.poincare_constant.into(),
            est.iterations.into(),
            est.inner_iterations.into(),
        ]);
    }
    let eps = report.column("epsilon").expect("column");
    if eps.len() >= 2 {
        let lam = report.column("lambda_min").expect("column");
        let fit = report.fit("lambda_min", &eps, &lam)?;
        report.check(
            "slope lambda_min",
            fit.slope,
            format!("{target} +- {tol}"),
            (fit.slope - target).abs() <= tol,
        );
    }
    if let Some(utol) = spec.tolerances.unit_box_tolerance {
        report.tolerance("unit_box_tolerance", utol);
        let nu = spec.unit_box_n.unwrap_or(64);
        let grid = MacGrid::unit(dim, nu, 1, Boundary::DirichletBox)?;
        let mask = FluidMask::unperforated(&grid)?;
        let est = smallest_poincare_eigenvalue(&grid, &mask, &spec.eigen)?;
        let exact = dim as f64 * std::f64::consts::PI.powi(2);
        report.notes.push(format!(
            "unit box lambda_min = {:e} at n = {nu}",
            est.lambda_min
        ));
        report.check_max(
            "|lambda_min(unit box) - d pi^2|",
            (est.lambda_min - exact).abs(),
            utol,
        );
    }
    Ok(report)
}

/// Smooth zero-mean data `cos(pi x_0 / R)` on the fluid cells of the box.
fn lift_data(grid: &MacGrid, mask: &FluidMask, r: f64) -> PressureField {
    let mut g = PressureField::from_fn(grid, |x| {
        (std::f64::consts::PI * (x[0] - grid.domain.origin[0]) / r).cos()
    });
    let mean = g.fluid_mean(mask);
    for (v, fluid) in g.values.iter_mut().zip(&mask.cells) {
        *v = if *fluid { *v - mean } else { 0.0 };
    }
    g
}

pub fn run_divlift_scaling_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let dim = lattice.dim;
    let max_slope = spec.tolerance(spec.tolerances.max_slope, "max_slope")?;
    if spec.radii.len() < 2 {
        return Err(Error::config("divlift_scaling needs at least two radii"));
    }
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &["r", "n", "constant", "h1_semi", "l2", "g_l2", "iterations"],
        fingerprint(spec, &lattice),
    );
    report.tolerance("max_slope", max_slope);
    for &r in &spec.radii {
        let mut hi = [0i64; 3];
        for h in hi.iter_mut().take(dim) {
            *h = r as i64 - 1;
        }
        let grid = MacGrid::cell_box(dim, spec.n, [0; 3], hi)?;
        let mask = rasterize(&lattice, &grid)?;
        let g = lift_data(&grid, &mask, r as f64);
        let lift = divergence_lift(&grid, &mask, &g, &spec.solver)?;
        report
            .logs
            .push((format!("lift R={r}"), lift.stats.log_text()));
        report.push_row(vec![
            r.into(),
            spec.n.into(),
            lift.constant.into(),
            lift.h1_semi.into(),
            lift.l2.into(),
            lift.g_l2.into(),
            lift.stats.iterations.into(),
        ]);
    }
    let rs = report.column("r").expect("column");
    let c = report.column("constant").expect("column");
    let fit = report.fit("constant", &rs, &c)?;
    report.check_max("slope lift constant", fit.slope, max_slope);
    Ok(report)
}

pub fn run_corrector_pressure_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let dim = lattice.dim;
    let min_slope = spec.tolerance(spec.tolerances.min_slope, "min_slope")?;
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &[
            "part",
            "epsilon",
            "cells",
            "j",
            "quotient_norm",
            "mean",
            "tilde_h1",
            "truncation_error",
            "iterations",
        ],
        fingerprint(spec, &lattice),
    );
    report.tolerance("min_slope", min_slope);
    let per = PeriodicCorrectors::solve(&lattice.base_shape, spec.n, &spec.corrector_solver)?;
    let mc = spec.margin_cells as i64;
    let mut eps_list = Vec::new();
    let mut worst = Vec::new();
    for m in spec.scales() {
        let eps = 1.0 / m as f64;
        let mut lo = [0i64; 3];
        let mut hi = [0i64; 3];
        let mut rlo = [0i64; 3];
        let mut rhi = [0i64; 3];
        for a in 0..dim {
            lo[a] = -mc;
            hi[a] = m as i64 - 1 + mc;
            rhi[a] = m as i64 - 1;
            rlo[a] = 0;
        }
        let mut q: f64 = 0.0;
        for j in 0..dim {
            let t = solve_corrector_on_box(&lattice, lo, hi, &per, j, &spec.solver, false)?;
            let st = corrector_pressure_stats(&t, rlo, rhi)?;
            let its = t.stats.as_ref().map_or(0, |s| s.iterations);
            if let Some(s) = &t.stats {
                report
                    .logs
                    .push((format!("corrector eps={eps} j={j}"), s.log_text()));
            }
            report.push_row(vec![
                "pressure".into(),
                eps.into(),
                m.into(),
                j.into(),
                st.quotient_norm.into(),
                st.mean.into(),
                t.tilde_h1()?.into(),
                nan(),
                its.into(),
            ]);
            q = q.max(st.quotient_norm);
        }
        eps_list.push(eps);
        worst.push(q);
    }
    if eps_list.len() >= 2 {
        let fit = report.fit("pressure_quotient", &eps_list, &worst)?;
        report.check_min(
            "slope corrector pressure quotient norm",
            fit.slope,
            min_slope,
        );
    }

    if !spec.radii.is_empty() {
        // truncation error ||w(R) - w(2R)||_{H^1(box R)} for each R
        let mut boxes = std::collections::BTreeMap::new();
        for &r in &spec.radii {
            for rr in [r, 2 * r] {
                if let std::collections::btree_map::Entry::Vacant(e) = boxes.entry(rr) {
                    e.insert(solve_truncated_corrector(
                        &lattice,
                        rr,
                        &per,
                        0,
                        &spec.solver,
                    )?);
                }
            }
        }
        let mut errs = Vec::new();
        for &r in &spec.radii {
            let err = h1_difference_on_subbox(&boxes[&r], &boxes[&(2 * r)])?;
            errs.push(err);
            report.push_row(vec![
                "truncation".into(),
                nan(),
                r.into(),
                0usize.into(),
                nan(),
                nan(),
                boxes[&r].tilde_h1()?.into(),
                err.into(),
                boxes[&r].stats.as_ref().map_or(0, |s| s.iterations).into(),
            ]);
        }
        let worst_step = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        report.check(
            "truncation error ratio R -> 2R (monotone decrease)",
            worst_step,
            "< 1".into(),
            worst_step < 1.0,
        );

        if let Some(factor) = spec.tolerances.tilde_factor {
            report.tolerance("tilde_factor", factor);
            let plain = lattice.periodic_part();
            let r = spec.radii[0];
            let t = solve_truncated_corrector(&plain, r, &per, 0, &spec.solver)?;
            let v = t.tilde_h1()?;
            report.push_row(vec![
                "unperturbed".into(),
                nan(),
                r.into(),
                0usize.into(),
                nan(),
                nan(),
                v.into(),
                nan(),
                t.stats.as_ref().map_or(0, |s| s.iterations).into(),
            ]);
            report.check_max("unperturbed ||w~||_H1", v, factor * spec.solver.rtol);
        }
    }
    Ok(report)
}

pub fn run_periodic_regularity_study(spec: &StudySpec) -> Result<StudyReport> {
    let lattice = spec.lattice()?;
    let dim = lattice.dim;
    let force = spec.force()?;
    require_compact_solenoidal_force(spec, force, dim)?;
    if spec.epsilons.len() != 1 {
        return Err(Error::config(
            "periodic_regularity uses exactly one epsilon",
        ));
    }
    if spec.resolutions.len() < 2 {
        return Err(Error::config(
            "periodic_regularity needs at least two resolutions",
        ));
    }
    let max_change = spec.tolerance(spec.tolerances.max_relative_change, "max_relative_change")?;
    let min_ratio = spec.tolerance(spec.tolerances.min_final_ratio, "min_final_ratio")?;
    let mut report = StudyReport::new(
        &spec.name,
        spec.kind.as_str(),
        &[
            "epsilon",
            "n",
            "h2_periodic",
            "h2",
            "ratio",
            "h1_periodic",
            "h1",
            "l2_periodic",
            "l2",
            "iterations",
        ],
        fingerprint(spec, &lattice),
    );
    report.tolerance("max_relative_change", max_change);
    report.tolerance("min_final_ratio", min_ratio);
    if lattice.is_periodic() {
        report
            .notes
            .push("lattice is unperturbed: both remainders coincide".into());
    }
    let m = spec.scales()[0];
    let eps = 1.0 / m as f64;
    for &n in &spec.resolutions {
        let per = PeriodicCorrectors::solve(&lattice.base_shape, n, &spec.corrector_solver)?;
        let perm = permeability(&per)?;
        if !is_isotropic(&perm) {
            return Err(Error::config(
                "periodic_regularity assumes an isotropic permeability",
            ));
        }
        let (grid, mask) = macro_grid(&lattice, n, m, spec.interior_margin)?;
        let sol = stokes(
            &mut report,
            format!("stokes n={n}"),
            &grid,
            &mask,
            force,
            spec,
        )?;
        let mut sub = spec.clone();
        sub.n = n;
        let set = corrector_set(&lattice, &per, m, &sub)?;
        let set_per = CorrectorSet::from_periodic(&per);
        let first = reconstruct_first_order(&set, force, MacroPressure::Zero, &grid, &mask)?;
        let first_per =
            reconstruct_first_order(&set_per, force, MacroPressure::Zero, &grid, &mask)?;
        let margin = spec.interior_margin;
        let r = remainder(
            "R",
            &grid,
            &mask,
            &sol.velocity,
            &sol.pressure,
            &first.u1,
            &first.p1,
            margin,
        )?;
        let rp = remainder(
            "R_per",
            &grid,
            &mask,
            &sol.velocity,
            &sol.pressure,
            &first_per.u1,
            &first_per.p1,
            margin,
        )?;
        report.push_row(vec![
            eps.into(),
            n.into(),
            rp.h2_interior.into(),
            r.h2_interior.into(),
            (rp.h2_interior / r.h2_interior).into(),
            rp.h1.into(),
            r.h1.into(),
            rp.l2.into(),
            r.l2.into(),
            sol.stats.iterations.into(),
        ]);
    }
    let hp = report.column("h2_periodic").expect("column");
    let h = report.column("h2").expect("column");
    let growth = hp
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::INFINITY, f64::min);
    report.check(
        "D2 R_per growth factor per refinement",
        growth,
        "> 1".into(),
        growth > 1.0,
    );
    let hmax = h.iter().cloned().fold(f64::MIN, f64::max);
    let hmin = h.iter().cloned().fold(f64::MAX, f64::min);
    report.check_max("D2 R relative change", (hmax - hmin) / hmin, max_change);
    let ratio = hp.last().unwrap() / h.last().unwrap();
    report.check_min("final D2 R_per / D2 R", ratio, min_ratio);
    Ok(report)
}

/// Run a study in a thread pool of the requested size.
pub fn run_study(spec: &StudySpec) -> Result<StudyReport> {
    let run = || match spec.kind {
        StudyKind::Convergence => run_convergence_study(spec),
        StudyKind::UniformEstimate => run_uniform_estimate_study(spec),
        StudyKind::Poincare => run_poincare_study(spec),
        StudyKind::DivliftScaling => run_divlift_scaling_study(spec),
        StudyKind::CorrectorPressure => run_corrector_pressure_study(spec),
        StudyKind::PeriodicRegularity => run_periodic_regularity_study(spec),
    };
    match spec.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}
