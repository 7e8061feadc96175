//! Lattice specification file.
//!
//! ```toml
//! dim = 2
//!
//! [base_shape]
//! kind = "ball"          # ball | ellipsoid | superellipsoid
//! center = [0.0, 0.0]
//! radii = [0.25, 0.25]   # or `radius = 0.25` for balls
//! # exponent = 4.0       # superellipsoid only
//!
//! [frame_margins]
//! inset = 0.125
//! outset = 0.0625
//!
//! [[overrides]]
//! k = [1, 0]
//! action = "translate"   # translate | remove | replace
//! params = { delta = [0.1, 0.0] }
//! alpha = 0.1            # optional declared magnitude
//! ```
//!
//! A `replace` override takes the shape keys (`kind`, `center`, `radii` or
//! `radius`, `exponent`) inside `params`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::lattice::{FrameMargins, Override, PerforationLattice, PerturbationSpec};
use super::shape::{CellShape, ShapeKind};
use crate::config::{located, Document};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeConfig {
    pub kind: ShapeKind,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
}

impl ShapeConfig {
    pub fn build(&self, dim: usize) -> Result<CellShape> {
        let center = self.center.clone().unwrap_or_else(|| vec![0.0; dim]);
        let radii = match (&self.radii, self.radius) {
            (Some(r), None) => r.clone(),
            (None, Some(r)) => vec![r; dim],
            (Some(_), Some(_)) => {
                return Err(Error::config("give either radii or radius, not both"))
            }
            (None, None) => return Err(Error::config("shape needs radii or radius")),
        };
        if self.exponent.is_some() && self.kind != ShapeKind::Superellipsoid {
            return Err(Error::config("exponent is only valid for superellipsoids"));
        }
        CellShape::new(dim, self.kind, &center, &radii, self.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OverrideAction {
    Translate,
    Remove,
    Replace,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideParams {
    #[serde(default)]
    pub delta: Option<Vec<f64>>,
    #[serde(default)]
    pub kind: Option<ShapeKind>,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideConfig {
    pub k: Vec<i64>,
    pub action: OverrideAction,
    #[serde(default)]
    pub params: Option<OverrideParams>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dim: usize,
    pub base_shape: ShapeConfig,
    #[serde(default)]
    pub frame_margins: Option<FrameMargins>,
    #[serde(default)]
    pub overrides: Vec<Spanned<OverrideConfig>>,
}

fn build_override(dim: usize, o: &OverrideConfig, base: &CellShape) -> Result<Override> {
    let params = o.params.clone().unwrap_or_default();
    match o.action {
        OverrideAction::Remove => {
            if o.params.is_some() {
                return Err(Error::config("remove takes no params"));
            }
            Ok(Override::Remove)
        }
        OverrideAction::Translate => {
            let delta = params
                .delta
                .ok_or_else(|| Error::config("translate needs params.delta"))?;
            if delta.len() != dim {
                return Err(Error::config(format!("delta needs {dim} entries")));
            }
            if params.kind.is_some() || params.center.is_some() || params.radii.is_some() {
                return Err(Error::config("translate only accepts params.delta"));
            }
            // validates that the moved shape stays inside the cell
            base.translated(&delta)?;
            let mut d = [0.0; 3];
            d[..dim].copy_from_slice(&delta);
            Ok(Override::Translate(d))
        }
        OverrideAction::Replace => {
            if params.delta.is_some() {
                return Err(Error::config("replace does not accept params.delta"));
            }
            let shape = ShapeConfig {
                kind: params
                    .kind
                    .ok_or_else(|| Error::config("replace needs params.kind"))?,
                center: params.center,
                radii: params.radii,
                radius: params.radius,
                exponent: params.exponent,
            };
            Ok(Override::Replace(shape.build(dim)?))
        }
    }
}

impl LatticeConfig {
    /// Build the lattice; errors carry the line of the offending override
    /// when `text` is the source document.
    pub fn build(&self, path: Option<&Path>, text: &str) -> Result<PerforationLattice> {
        let dim = self.dim;
        if dim != 2 && dim != 3 {
            return Err(located(
                path,
                text,
                None,
                Error::config("dim must be 2 or 3"),
            ));
        }
        let base = self
            .base_shape
            .build(dim)
            .map_err(|e| located(path, text, None, e))?;
        let mut spec = PerturbationSpec::none();
        for o in &self.overrides {
            let at = Some(o.span().start);
            let cfg = o.get_ref();
            if cfg.k.len() != dim {
                return Err(located(
                    path,
                    text,
                    at,
                    Error::config(format!("k needs {dim} entries")),
                ));
            }
            let mut k = [0i64; 3];
            k[..dim].copy_from_slice(&cfg.k);
            if spec.overrides.contains_key(&k) {
                return Err(located(
                    path,
                    text,
                    at,
                    Error::config(format!("duplicate override for cell {:?}", cfg.k)),
                ));
            }
            let ov = build_override(dim, cfg, &base).map_err(|e| located(path, text, at, e))?;
            spec.overrides.insert(k, ov);
            if let Some(a) = cfg.alpha {
                spec.declared_alpha.insert(k, a);
            }
        }
        PerforationLattice::new(base, spec, self.frame_margins.unwrap_or_default())
            .map_err(|e| located(path, text, None, e))
    }
}

/// Parse a lattice file (with optional `key=value` overrides).
pub fn load_lattice(path: &Path, overrides: &[String]) -> Result<PerforationLattice> {
    let doc = Document::read(path, overrides)?;
    let cfg: LatticeConfig = doc.parse()?;
    cfg.build(doc.path.as_deref(), &doc.text)
}

/// Build a lattice from an already parsed (e.g. inline) configuration.
pub fn lattice_from_config(cfg: &LatticeConfig) -> Result<PerforationLattice> {
    cfg.build(None, "")
}

pub fn parse_lattice(text: &str) -> Result<PerforationLattice> {
    let cfg: LatticeConfig = crate::config::parse_toml(text, None)?;
    cfg.build(None, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PERIODIC: &str = "dim = 2\n[base_shape]\nkind = \"ball\"\nradius = 0.25\n";

    #[test]
    fn parses_periodic() {
        let l = parse_lattice(PERIODIC).unwrap();
        assert!(l.is_periodic());
        assert_eq!(l.base_shape.radii[0], 0.25);
    }

    #[test]
    fn parses_overrides() {
        let text = format!(
            "{PERIODIC}\n[[overrides]]\nk = [0, 0]\naction = \"remove\"\n\n[[overrides]]\nk = [1, 0]\naction = \"translate\"\nparams = {{ delta = [0.1, 0.0] }}\nalpha = 0.1\n\n[[overrides]]\nk = [2, 0]\naction = \"replace\"\nparams = {{ kind = \"superellipsoid\", radii = [0.2, 0.2], exponent = 4.0 }}\n"
        );
        let l = parse_lattice(&text).unwrap();
        assert_eq!(l.perturbation.overrides.len(), 3);
        assert_eq!(l.perturbation.overrides[&[0, 0, 0]], Override::Remove);
        assert_eq!(l.perturbation.declared_alpha[&[1, 0, 0]], 0.1);
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = format!("{PERIODIC}colour = 3\n");
        match parse_lattice(&text) {
            Err(Error::Config { line: Some(5), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_error_points_at_override() {
        let text = format!(
            "{PERIODIC}\n[[overrides]]\nk = [0, 0]\naction = \"translate\"\nparams = {{ delta = [0.6, 0.0] }}\n"
        );
        match parse_lattice(&text) {
            Err(Error::Config {
                line: Some(l),
                message,
                ..
            }) => {
                assert!((6..=9).contains(&l), "line {l}");
                assert!(message.contains("center"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }
}
