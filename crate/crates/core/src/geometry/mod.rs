//! Perforation lattices, hole membership and the geometric assumption checks.

pub mod assumptions;
pub mod config;
pub mod lattice;
pub mod shape;

pub use assumptions::{
    cell_symdiff, perturbation_magnitude, regularity_proxies, symdiff_volume, validate_assumptions,
    validate_assumptions_with_bound, AssumptionReport, CellAssumptions, RegularityProxies,
};
pub use config::{lattice_from_config, load_lattice, parse_lattice, LatticeConfig};
pub use lattice::{
    hole_indicator, locate, CellIndex, DomainSpec, FrameMargins, Override, PerforationLattice,
    PerturbationSpec,
};
pub use shape::{CellShape, ShapeKind};
