//! Polytopal discontinuous Galerkin discretization of the monodomain
//! equation with a two-level additive Schwarz preconditioner built from mesh
//! agglomeration.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! parsing and the command line driver live in the `polydg` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub(crate) mod math;
pub mod mesh;
pub mod agglomerate;
pub mod quadrature;
pub mod dgspace;
pub mod linalg;
pub mod assembly;
pub mod ionics;
pub mod krylov;
pub mod schwarz;
pub mod timestepper;

pub use error::{Error, MeshError};
pub use geometry::{Point, Rect};
pub use mesh::{Face, PolygonalMesh, Region};
