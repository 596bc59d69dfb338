//! Screw-theoretic analysis of rigid-body trajectories.
//!
//! Poses are unit dual quaternions. A recorded end-effector trajectory can be
//! tested for constant-screw structure ([`extraction`]), split greedily into a
//! sequence of constant screws ([`segmentation`]), and turned into new
//! task-space plans by screw-linear interpolation ([`motion`]).
//!
//! The crate is `no_std` compatible (with `alloc`) when built without the
//! default `std` feature.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod float;

pub mod dual_quat;
pub mod error;
pub mod extraction;
pub mod kinematics;
pub mod metric;
pub mod motion;
pub mod quat;
pub mod screw;
pub mod segmentation;
pub mod synth;
pub mod vec3;

pub use dual_quat::{Pose, UnitDualQuaternion};
pub use error::Error;
pub use extraction::{get_screw_parameters, PoseTrajectory, ScrewFitResult, Verdict};
pub use motion::{articulated_plan, build_guiding_poses, extract_key_segments, plan_from_guiding_poses, reanchor, RegionOfInterest, StepBounds, TaskScene};
pub use metric::{dist_p, dist_phi, in_neighbourhood, Tolerance};
pub use quat::{Quaternion, UnitQuaternion};
pub use screw::{Pitch, ScrewParams};

pub use segmentation::{get_screw_segments, reconstruct, ScrewSegment, Segmentation};
pub use vec3::Vec3;

/// Rotation angle (rad) below which a displacement is treated as a pure translation.
pub const THETA_MIN: f64 = 1e-6;
/// Translation (m) below which a rotation-free displacement counts as no motion.
pub const D_MIN: f64 = 1e-6;
