//! File formats, configuration, experiment drivers and the command line for
//! the polytopal DG monodomain solver in `polydg-core`.

pub mod config;
pub mod error;
pub mod inspect;
pub mod mesh_io;
pub mod simulate;
pub mod snapshot;
pub mod study;

pub use error::CliError;
pub use polydg_core as core;
