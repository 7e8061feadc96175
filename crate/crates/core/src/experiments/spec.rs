//! Study configuration files.
//!
//! ```toml
//! kind = "convergence"
//! name = "thm23"
//! epsilons = [0.25, 0.125]
//! n = 8
//! lattice = "ball3d.toml"      # relative to this file, or an inline table
//! interior_margin = 0.2
//!
//! [force]
//! kind = "curl_bump"
//! center = [0.5, 0.5, 0.5]
//! radius = 0.35
//! amplitude = 1.0
//! axis = [0.0, 0.0, 1.0]
//!
//! [solver]
//! rtol = 1e-8
//!
//! [tolerances]
//! min_slope = 0.7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Document;
use crate::error::{Error, Result};
use crate::geometry::{lattice_from_config, load_lattice, LatticeConfig, PerforationLattice};
use crate::homogenization::ForceField;
use crate::stokes::{EigenConfig, SolverConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    Convergence,
    UniformEstimate,
    Poincare,
    DivliftScaling,
    CorrectorPressure,
    PeriodicRegularity,
}

impl StudyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::UniformEstimate => "uniform_estimate",
            StudyKind::Poincare => "poincare",
            StudyKind::DivliftScaling => "divlift_scaling",
            StudyKind::CorrectorPressure => "corrector_pressure",
            StudyKind::PeriodicRegularity => "periodic_regularity",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeRef {
    Path(PathBuf),
    Inline(LatticeConfig),
}

impl LatticeRef {
    /// Load the lattice, reading relative paths against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<PerforationLattice> {
        match self {
            LatticeRef::Path(p) => {
                let p = if p.is_absolute() {
                    p.clone()
                } else {
                    base_dir.join(p)
                };
                load_lattice(&p, &[])
            }
            LatticeRef::Inline(c) => lattice_from_config(c),
        }
    }
}

/// Pass/fail thresholds. Each study reads the ones it needs.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub min_slope: Option<f64>,
    pub max_slope: Option<f64>,
    pub target_slope: Option<f64>,
    pub slope_tolerance: Option<f64>,
    /// Bound on `max / min` of a quantity over the sweep.
    pub max_variation: Option<f64>,
    /// Bound on `perturbed / periodic` ratios.
    pub max_lattice_ratio: Option<f64>,
    pub unit_box_tolerance: Option<f64>,
    /// Bound on `||w~||_{H^1} / rtol` for an unperturbed lattice.
    pub tilde_factor: Option<f64>,
    pub max_relative_change: Option<f64>,
    pub min_final_ratio: Option<f64>,
    /// Bound on `div(corrected) / div(plain)` of the first-order velocity.
    pub max_divergence_ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub kind: StudyKind,
    pub name: String,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    pub n: usize,
    pub lattice: LatticeRef,
    /// Second lattice run side by side (uniform estimate).
    #[serde(default)]
    pub compare_lattice: Option<LatticeRef>,
    #[serde(default)]
    pub force: Option<ForceField>,
    #[serde(default = "default_margin")]
    pub interior_margin: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Solver settings for cell problems.
    #[serde(default = "corrector_solver")]
    pub corrector_solver: SolverConfig,
    #[serde(default)]
    pub eigen: EigenConfig,
    /// Resolution sweep at fixed epsilon (periodic regularity).
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// Box sizes in cells (divergence lift, truncation error).
    #[serde(default)]
    pub radii: Vec<usize>,
    /// Cells added around `(1/eps) Omega` for truncated correctors.
    #[serde(default = "default_margin_cells")]
    pub margin_cells: usize,
    /// Per-cell resolution of the unit-box reference eigenvalue.
    #[serde(default)]
    pub unit_box_n: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// Canonical text of the spec, for the fingerprint.
    #[serde(skip)]
    pub source: String,
}

fn default_margin() -> f64 {
    0.2
}

fn default_margin_cells() -> usize {
    2
}

fn corrector_solver() -> SolverConfig {
    SolverConfig::with_rtol(crate::cell::CORRECTOR_RTOL)
}

impl StudySpec {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let doc = Document::read(path, overrides)?;
        Self::from_document(&doc)
    }

    pub fn from_text(text: &str, base_dir: &Path) -> Result<Self> {
        let doc = Document::from_text(text.to_string(), None, &[])?;
        let mut s = Self::from_document(&doc)?;
        s.base_dir = base_dir.to_path_buf();
        Ok(s)
    }

    fn from_document(doc: &Document) -> Result<Self> {
        let mut spec: StudySpec = doc.parse()?;
        spec.base_dir = doc.base_dir();
        spec.source = doc.text.clone();
        spec.validate()
            .map_err(|e| crate::config::located(doc.path.as_deref(), &doc.text, None, e))?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 8 {
            return Err(Error::config("n must be at least 8"));
        }
        for e in &self.epsilons {
            let m = 1.0 / e;
            if !(*e > 0.0 && *e <= 1.0) || (m - m.round()).abs() > 1e-9 * m {
                return Err(Error::config(format!("epsilon {e} is not 1/integer")));
            }
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("epsilons must be strictly decreasing"));
        }
        if self.resolutions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("resolutions must be strictly increasing"));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("radii must be strictly increasing"));
        }
        if !(self.interior_margin > 0.0 && self.interior_margin < 0.5) {
            return Err(Error::config("interior_margin must lie in (0, 1/2)"));
        }
        self.solver.validate()?;
        self.corrector_solver.validate()?;
        let needs_eps = !matches!(self.kind, StudyKind::DivliftScaling);
        if needs_eps && self.epsilons.is_empty() {
            return Err(Error::config("epsilons must not be empty"));
        }
        Ok(())
    }

    /// `1/epsilon` for each entry.
    pub fn scales(&self) -> Vec<usize> {
        self.epsilons
            .iter()
            .map(|e| (1.0 / e).round() as usize)
            .collect()
    }

    fn resolve(&self, r: &LatticeRef) -> Result<PerforationLattice> {
        r.resolve(&self.base_dir)
    }

    pub fn lattice(&self) -> Result<PerforationLattice> {
        self.resolve(&self.lattice)
    }

    pub fn compare_lattice(&self) -> Result<Option<PerforationLattice>> {
        self.compare_lattice
            .as_ref()
            .map(|r| self.resolve(r))
            .transpose()
    }

    pub fn force(&self) -> Result<&ForceField> {
        self.force.as_ref().ok_or_else(|| {
            Error::config(format!(
                "{} study needs a [force] table",
                self.kind.as_str()
            ))
        })
    }

    pub fn tolerance(&self, value: Option<f64>, key: &str) -> Result<f64> {
        value.ok_or_else(|| {
            Error::config(format!(
                "{} study needs tolerances.{key}",
                self.kind.as_str()
            ))
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        match &self.output {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => self.base_dir.join(p),
            None => self.base_dir.join("out").join(&self.name),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
kind = "poincare"
name = "p"
epsilons = [0.25, 0.125]
n = 16
lattice = { dim = 2, base_shape = { kind = "ball", radius = 0.25 } }
"#;

    #[test]
    fn parses_inline_lattice() {
        let s = StudySpec::from_text(BASE, Path::new(".")).unwrap();
        assert_eq!(s.scales(), vec![4, 8]);
        assert!(s.lattice().unwrap().is_periodic());
    }

    #[test]
    fn rejects_bad_epsilons() {
        let t = BASE.replace("[0.25, 0.125]", "[0.125, 0.25]");
        assert!(matches!(
            StudySpec::from_text(&t, Path::new(".")),
            Err(Error::Config { .. })
        ));
        let t = BASE.replace("[0.25, 0.125]", "[0.3]");
        assert!(StudySpec::from_text(&t, Path::new(".")).is_err());
    }

    #[test]
    fn unknown_key_has_line() {
        let t = format!("{BASE}bogus = 1\n");
        match StudySpec::from_text(&t, Path::new(".")) {
            Err(Error::Config { line: Some(7), .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
