//! Lagrangian compressible Navier–Stokes / wave fluid–structure interaction on
//! a three-layer periodic channel.

pub mod error;
pub mod field;
pub mod fsi;
pub mod geometry;
pub mod inequality;
pub mod kinematics;
pub mod lame;
pub mod linalg;
pub mod mat3;
pub mod norms;
pub mod ops;
pub mod spectral;
pub mod wave;

pub use error::{FsiError, Result};
pub use field::{Field, Pair, Rank, TimeTrack};
pub use geometry::{build_geometry, ChannelGeometry, Domain, SlabGrid, PERIOD};
