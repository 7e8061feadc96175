use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::shape::CellShape;
use crate::error::{Error, Result};

/// Lattice index of a cell `Q_k = k + (-1/2, 1/2)^d`; unused axes are 0.
pub type CellIndex = [i64; 3];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Override {
    Translate([f64; 3]),
    Remove,
    Replace(CellShape),
}

/// Finitely supported modification of the periodic hole family.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    #[serde(with = "cell_map")]
    pub overrides: BTreeMap<CellIndex, Override>,
    #[serde(with = "cell_map")]
    pub declared_alpha: BTreeMap<CellIndex, f64>,
}

/// Cell-indexed maps as `[[k, value], ...]`, since JSON keys must be strings.
mod cell_map {
    use super::CellIndex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<T: Serialize, S: Serializer>(
        m: &BTreeMap<CellIndex, T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(m.iter())
    }

    pub fn deserialize<'de, T: Deserialize<'de>, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<CellIndex, T>, D::Error> {
        Ok(Vec::<(CellIndex, T)>::deserialize(d)?.into_iter().collect())
    }
}

impl PerturbationSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(mut self, k: CellIndex, action: Override) -> Self {
        self.overrides.insert(k, action);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }
}

/// Insets/outsets of the cells `Q'` and `Q''` relative to `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameMargins {
    pub inset: f64,
    pub outset: f64,
}

impl Default for FrameMargins {
    fn default() -> Self {
        Self {
            inset: 0.125,
            outset: 0.0625,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerforationLattice {
    pub dim: usize,
    pub base_shape: CellShape,
    pub perturbation: PerturbationSpec,
    pub frame_margins: FrameMargins,
}

impl PerforationLattice {
    pub fn new(
        base_shape: CellShape,
        perturbation: PerturbationSpec,
        frame_margins: FrameMargins,
    ) -> Result<Self> {
        let dim = base_shape.dim;
        if !(frame_margins.inset > 0.0 && frame_margins.outset > 0.0) || frame_margins.inset >= 0.5
        {
            return Err(Error::InvalidGeometry(
                "frame margins must be positive and the inset below 1/2".into(),
            ));
        }
        for (k, ov) in &perturbation.overrides {
            if k[dim..].iter().any(|&c| c != 0) {
                return Err(Error::InvalidGeometry(format!(
                    "override index {k:?} has entries beyond dimension {dim}"
                )));
            }
            if let Override::Replace(s) = ov {
                if s.dim != dim {
                    return Err(Error::InvalidGeometry(format!(
                        "replacement shape at {k:?} has dimension {}",
                        s.dim
                    )));
                }
            }
        }
        for (k, a) in &perturbation.declared_alpha {
            if !(a.is_finite() && *a > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "declared alpha at {k:?} must be positive"
                )));
            }
        }
        Ok(Self {
            dim,
            base_shape,
            perturbation,
            frame_margins,
        })
    }

    pub fn periodic(base_shape: CellShape) -> Self {
        Self {
            dim: base_shape.dim,
            base_shape,
            perturbation: PerturbationSpec::none(),
            frame_margins: FrameMargins::default(),
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.perturbation.is_empty()
    }

    /// Hole of cell `k` in local coordinates, `None` if removed.
    pub fn hole(&self, k: &CellIndex) -> Option<Cow<'_, CellShape>> {
        match self.perturbation.overrides.get(k) {
            None => Some(Cow::Borrowed(&self.base_shape)),
            Some(Override::Remove) => None,
            Some(Override::Replace(s)) => Some(Cow::Borrowed(s)),
            Some(Override::Translate(d)) => {
                let mut s = self.base_shape.clone();
                for i in 0..self.dim {
                    s.center[i] += d[i];
                }
                Some(Cow::Owned(s))
            }
        }
    }

    /// Same lattice without its perturbation.
    pub fn periodic_part(&self) -> Self {
        Self {
            perturbation: PerturbationSpec::none(),
            ..self.clone()
        }
    }

    /// Stable 64-bit fingerprint (FNV-1a over the JSON encoding).
    pub fn fingerprint(&self) -> u64 {
        let s = serde_json::to_string(self).expect("lattice serializes");
        fnv1a(s.as_bytes())
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Split a lattice-coordinate point into its cell index and local offset.
pub fn locate(dim: usize, y: &[f64]) -> (CellIndex, [f64; 3]) {
    let mut k = [0i64; 3];
    let mut local = [0.0; 3];
    for i in 0..dim {
        let c = (y[i] + 0.5).floor();
        k[i] = c as i64;
        local[i] = y[i] - c;
    }
    (k, local)
}

/// Whether the lattice-coordinate point `y` lies inside the hole of its cell.
pub fn hole_indicator(lattice: &PerforationLattice, y: &[f64]) -> bool {
    let (k, local) = locate(lattice.dim, y);
    match lattice.hole(&k) {
        Some(shape) => shape.contains(&local),
        None => false,
    }
}

/// Axis-aligned macroscopic box `Omega = origin + [0, lengths]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dim: usize,
    pub origin: [f64; 3],
    pub lengths: [f64; 3],
    /// Distance from the box boundary defining the interior region `Omega''`.
    pub interior_margin: f64,
}

impl DomainSpec {
    pub fn new(dim: usize, origin: &[f64], lengths: &[f64], interior_margin: f64) -> Result<Self> {
        if dim != 2 && dim != 3 || origin.len() != dim || lengths.len() != dim {
            return Err(Error::InvalidGeometry(
                "box needs dim in {2,3} and matching extents".into(),
            ));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidGeometry(
                "box side lengths must be positive".into(),
            ));
        }
        let min_side = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(interior_margin >= 0.0 && interior_margin < 0.5 * min_side) {
            return Err(Error::InvalidGeometry(format!(
                "interior margin {interior_margin} must lie in [0, {})",
                0.5 * min_side
            )));
        }
        let mut o = [0.0; 3];
        let mut l = [1.0; 3];
        o[..dim].copy_from_slice(origin);
        l[..dim].copy_from_slice(lengths);
        Ok(Self {
            dim,
            origin: o,
            lengths: l,
            interior_margin,
        })
    }

    pub fn unit(dim: usize, interior_margin: f64) -> Result<Self> {
        Self::new(dim, &vec![0.0; dim], &vec![1.0; dim], interior_margin)
    }

    /// Distance of `x` from the box boundary (negative outside).
    pub fn boundary_distance(&self, x: &[f64; 3]) -> f64 {
        (0..self.dim)
            .map(|i| (x[i] - self.origin[i]).min(self.origin[i] + self.lengths[i] - x[i]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn in_interior(&self, x: &[f64; 3]) -> bool {
        self.boundary_distance(x) > self.interior_margin
    }

    pub fn volume(&self) -> f64 {
        self.lengths[..self.dim].iter().product()
    }
}
