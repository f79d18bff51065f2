//! Numerical laboratory for mean curvature flow with free boundary in a
//! barrier hypersurface.
//!
//! The crate evolves discretized surfaces (axisymmetric profiles and planar
//! curves) that meet an analytic barrier orthogonally, extracts perturbed
//! curvature quantities and pinching functionals, and checks evolution
//! equations, boundary identities, matrix inequalities and integral
//! inequalities on the simulated flows.

pub mod barrier;
pub mod error;
pub mod symm_poly;

pub use barrier::{AmbientFields, Barrier, BarrierCtx, BarrierKind};
pub use error::{Error, Result};
pub use symm_poly::{EigenVector, SymMatrix};

/// Point in the profile plane: (r, z) in axisymmetric mode, (x, y) in planar
/// mode.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Ambient point; profile points embed as (u, 0, v).
pub type Vec3 = nalgebra::Vector3<f64>;
