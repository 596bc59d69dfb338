//! Product-of-exponentials forward kinematics for serial chains.

use alloc::vec::Vec;

use crate::dual_quat::{Pose, UnitDualQuaternion};
use crate::error::{Error, Result};
use crate::screw::ScrewParams;

/// Serial chain: joint screws in the base frame at the home configuration,
/// and the end-effector home pose.
#[derive(Debug, Clone, PartialEq)]
pub struct JointChain {
    /// The `magnitude` of each joint screw is ignored; joint values replace it.
    pub joints: Vec<ScrewParams>,
    pub home: Pose,
}

impl JointChain {
    /// `exp(S1 q1) * ... * exp(Sn qn) * home`. Joint values are radians for
    /// finite-pitch joints and meters for prismatic ones.
    pub fn forward(&self, joint_values: &[f64]) -> Result<Pose> {
        fk_poe(self, joint_values)
    }
}

pub fn fk_poe(chain: &JointChain, joint_values: &[f64]) -> Result<Pose> {
    if chain.joints.len() != joint_values.len() {
        return Err(Error::LengthMismatch { expected: chain.joints.len(), got: joint_values.len() });
    }
    let mut acc = UnitDualQuaternion::IDENTITY;
    for (joint, &q) in chain.joints.iter().zip(joint_values) {
        acc = acc * joint.with_magnitude(q).displacement();
    }
    Ok((acc * chain.home.to_dq()).renormalize().to_pose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::UnitQuaternion;
    use crate::vec3::Vec3;
    use alloc::vec;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_configuration_is_home() {
        let home = Pose::new(UnitQuaternion::from_axis_angle(Vec3::X, 0.3), Vec3::new(0.4, 0.1, 0.9));
        let chain = JointChain {
            joints: vec![ScrewParams::revolute(Vec3::Z, Vec3::ZERO, 0.0), ScrewParams::prismatic(Vec3::Y, 0.0)],
            home,
        };
        let pose = chain.forward(&[0.0, 0.0]).unwrap();
        assert!((pose.position - home.position).max_abs() < 1e-15);
    }

    #[test]
    fn revolute_quarter_turn() {
        let chain = JointChain {
            joints: vec![ScrewParams::revolute(Vec3::Z, Vec3::ZERO, 0.0)],
            home: Pose::new(UnitQuaternion::IDENTITY, Vec3::X),
        };
        let pose = chain.forward(&[FRAC_PI_2]).unwrap();
        assert!((pose.position - Vec3::Y).max_abs() < 1e-15);
    }

    #[test]
    fn prismatic_slide_and_length_check() {
        let chain = JointChain { joints: vec![ScrewParams::prismatic(Vec3::X, 0.0)], home: Pose::IDENTITY };
        let pose = chain.forward(&[0.25]).unwrap();
        assert!((pose.position - Vec3::new(0.25, 0.0, 0.0)).max_abs() < 1e-15);
        assert_eq!(chain.forward(&[0.1, 0.2]), Err(Error::LengthMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn two_link_planar_arm() {
        // Links of 1.0 and 0.5 along x; joints about z at the origin and at x = 1.
        let chain = JointChain {
            joints: vec![
                ScrewParams::revolute(Vec3::Z, Vec3::ZERO, 0.0),
                ScrewParams::revolute(Vec3::Z, Vec3::X, 0.0),
            ],
            home: Pose::new(UnitQuaternion::IDENTITY, Vec3::new(1.5, 0.0, 0.0)),
        };
        let (a, b) = (0.4_f64, -1.1_f64);
        let pose = chain.forward(&[a, b]).unwrap();
        let expected = Vec3::new(a.cos() + 0.5 * (a + b).cos(), a.sin() + 0.5 * (a + b).sin(), 0.0);
        assert!((pose.position - expected).max_abs() < 1e-14);
    }
}
