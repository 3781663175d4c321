//! Semantic multi-plane image (MPI) toolkit.
//!
//! Turns semantic occupancy grids and camera rigs into per-camera stacks of
//! fronto-parallel label planes, plus the tooling around them: voxel scene
//! editing, loss weight maps, class-balanced sampling plans, file formats,
//! synthetic scenes and a small f64 reference of the conditioning blocks.
//!
//! Most builders come in two flavours: `foo(..)` runs on the default
//! executor and `foo_with(exec, ..)` takes an explicit [`Exec`]. Both give
//! bit-identical results.

pub mod cbgs;
pub mod edit;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod io;
pub mod label;
pub mod mpi;
pub mod palette;
pub mod pixmap;
pub mod reweigh;
pub mod stats;
pub mod synth;
pub mod toy;

pub use error::{Error, FormatError, Result};
pub use exec::Exec;
pub use geometry::{CameraModel, CameraRig, GridSpec, OccupancyGrid};
pub use label::SemanticLabel;
pub use mpi::{MpiConfig, MpiSlab, MpiStack};
pub use pixmap::PixelMap;
