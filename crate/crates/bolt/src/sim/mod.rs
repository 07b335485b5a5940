//! Cloth simulation: anisotropic stretch and bending on sewing-pattern frames,
//! seam constraints, SDF and cloth-cloth contact, and the explicit stepper the
//! progressive draping pipeline drives.

pub mod bend;
pub mod collide;
pub mod material;
pub mod seam_bend;
pub mod state;
pub mod step;
pub mod stretch;

pub use collide::{cloth_cloth_impulses, sdf_impulses, CollisionParams, SdfContacts};
pub use material::{MaterialParams, PanelMaterial, SeamMaterial};
pub use state::{Collider, LowerLayer, SimState, TriangleRest};
pub use step::{enforce_seams, step, step_frame, SimParams, StepStats};
