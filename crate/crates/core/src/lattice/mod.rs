//! Lattice geometry, spinor algebra, the action stencil and the evolution
//! generator built from them.

pub mod generator;
pub mod geometry;
pub mod params;
pub mod spinor;
pub mod stencil;
pub mod transfer;

pub use generator::{
    bloch_block, build_generator_grassmann, build_generator_sector, lattice_dispersion, one_body_matrix,
    GrassmannGenerator,
};
pub use geometry::{LatticeGeometry, Parity};
pub use params::{ExternalPotential, ModelParams, Species};
pub use spinor::SpinorAlgebra;
pub use stencil::stencil;
pub use transfer::StaggeredTransfer;
