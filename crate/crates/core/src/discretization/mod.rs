//! Symmetry-reduced grids, finite-volume energies and field utilities.

pub mod field;
pub mod grid;
pub mod mesh;
pub mod precond;
pub mod problem;
pub mod weights;

pub use field::{sample_closed_form, Center, Field};
pub use grid::{GridMode, MeshSpec, ReducedGrid};
pub use precond::StiffnessSolver;
pub use problem::{DiscreteProblem, EnergyBreakdown};
pub use weights::PotentialWeights;
