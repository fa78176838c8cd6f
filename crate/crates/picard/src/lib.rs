//! Exact-arithmetic positivity and stability engine for compact Kähler
//! surfaces described by their intersection lattice.
//!
//! A surface enters the engine as a Lorentzian lattice together with a
//! declared complete list of negative curves and a reference ample class.
//! On top of that the crate provides:
//!
//! - Zariski decompositions of big classes by monotone iteration, with an
//!   independent subset-enumeration oracle ([`zariski`]);
//! - Kähler/nef/big classification by finitely many curve inequalities
//!   ([`lattice`]);
//! - solvability certificates for the J-equation, the deformed
//!   Hermitian Yang-Mills equation and the rank-one Z-critical equation,
//!   plus thresholds, optimal destabilizers and flow singular loci
//!   ([`pde`]);
//! - slope test-configuration invariants from deformation to the normal
//!   cone ([`stability`]);
//! - wall-and-chamber atlases over two-parameter families of stability
//!   data ([`walls`]).
//!
//! All core arithmetic is exact arbitrary-precision rational; floating
//! point appears only in SVG export.

pub mod eps;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod pde;
pub mod rational;
pub mod sample;
pub mod stability;
pub mod walls;
pub mod zariski;

pub use eps::EpsRational;
pub use error::Error;
pub use lattice::{AmpleStatus, DivisorClass, PositivityReport, SurfaceLattice};
pub use pde::{
    DHYMProblem, JProblem, NefThresholdResult, SolvabilityCertificate, StabilityData, ZProblem,
};
pub use rational::Q;
pub use stability::{SlopeInvariants, SlopeTestConfig};
pub use walls::{ChamberMap, FamilySpec};
pub use zariski::ZariskiDecomposition;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
