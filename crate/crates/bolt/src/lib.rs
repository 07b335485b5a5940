//! Batch garment refitting for dressed characters.
//!
//! Takes garments authored on one body (3D mesh + 2D sewing pattern + seams)
//! and refits them onto another body: a volumetric displacement field carries
//! the garment across, the 2D pattern is re-optimized to match the carried
//! strain, the outfit is re-draped layer by layer against winding-number-signed
//! distance fields, and skinning weights are transferred from the target body.
//!
//! Conventions used throughout:
//! - lengths are centimeters, masses grams, time seconds;
//! - triangle meshes are indexed (`u32`), counter-clockwise orientation,
//!   outward normals;
//! - 2D pattern layouts share the triangle list of their 3D mesh one-to-one;
//!   panels are disconnected islands sewn together by explicit seam pairs.

pub mod error;
pub mod math;
pub mod mesh;
pub mod pattern;
pub mod pipeline;
pub mod rig;
pub mod sdf;
pub mod shapes;
pub mod sim;
pub mod transfer;

pub use error::{Error, Result};

/// Column vector aliases; all geometry is `f64`.
pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type Mat3x2 = nalgebra::Matrix3x2<f64>;
