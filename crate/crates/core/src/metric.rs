//! Separate position and orientation distances on SE(3).

use core::f64::consts::SQRT_2;

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};

/// Radii of an `(eps_p, eps_phi)` pose neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    eps_p: f64,
    eps_phi: f64,
}

impl Tolerance {
    /// Articulated-object defaults: 1 cm and 0.1.
    pub const ARTICULATED: Tolerance = Tolerance { eps_p: 0.01, eps_phi: 0.1 };
    /// Complex-task segmentation defaults: 1 cm and 0.15.
    pub const COMPLEX_TASK: Tolerance = Tolerance { eps_p: 0.01, eps_phi: 0.15 };

    /// `eps_p > 0` (meters) and `0 < eps_phi <= sqrt(2)`.
    pub fn new(eps_p: f64, eps_phi: f64) -> Result<Self> {
        if !(eps_p.is_finite() && eps_p > 0.0) {
            return Err(Error::InvalidTolerance("eps_p must be positive"));
        }
        if !(eps_phi > 0.0 && eps_phi <= SQRT_2) {
            return Err(Error::InvalidTolerance("eps_phi must lie in (0, sqrt 2]"));
        }
        Ok(Tolerance { eps_p, eps_phi })
    }

    pub fn eps_p(&self) -> f64 {
        self.eps_p
    }

    pub fn eps_phi(&self) -> f64 {
        self.eps_phi
    }

    pub fn admits(&self, d_p: f64, d_phi: f64) -> bool {
        d_p <= self.eps_p && d_phi <= self.eps_phi
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::ARTICULATED
    }
}

/// Euclidean distance between positions.
pub fn dist_p(a: &UnitDualQuaternion, b: &UnitDualQuaternion) -> f64 {
    (a.translation() - b.translation()).norm()
}

/// `min(|Q1 - Q2|, |Q1 + Q2|)` on the rotation quaternions, in `[0, sqrt 2]`.
pub fn dist_phi(a: &UnitDualQuaternion, b: &UnitDualQuaternion) -> f64 {
    let qa = a.real().quaternion();
    let qb = b.real().quaternion();
    (qa - qb).norm().min((qa + qb).norm())
}

pub fn in_neighbourhood(d: &UnitDualQuaternion, center: &UnitDualQuaternion, tol: &Tolerance) -> bool {
    tol.admits(dist_p(d, center), dist_phi(d, center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::UnitQuaternion;
    use crate::vec3::Vec3;
    use core::f64::consts::PI;

    #[test]
    fn orientation_distance_respects_double_cover() {
        let d = UnitDualQuaternion::from_rotation_translation(UnitQuaternion::from_axis_angle(Vec3::X, 0.8), Vec3::Y);
        assert_eq!(dist_phi(&d, &d), 0.0);
        assert_eq!(dist_phi(&d, &d.antipode()), 0.0);
        let half_turn = UnitDualQuaternion::from_rotation(UnitQuaternion::from_axis_angle(Vec3::Z, PI));
        assert!((dist_phi(&UnitDualQuaternion::IDENTITY, &half_turn) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn neighbourhood_membership() {
        let a = UnitDualQuaternion::IDENTITY;
        assert!(in_neighbourhood(&a, &a, &Tolerance::new(1e-9, 1e-9).unwrap()));
        let far = UnitDualQuaternion::from_translation(Vec3::new(0.02, 0.0, 0.0));
        assert!(!in_neighbourhood(&far, &a, &Tolerance::ARTICULATED));
        // 0.5 cm apart, chord distance 0.05.
        let angle = 4.0 * (0.05_f64 / 2.0).asin();
        let near = UnitDualQuaternion::from_rotation_translation(
            UnitQuaternion::from_axis_angle(Vec3::Z, angle),
            Vec3::new(0.005, 0.0, 0.0),
        );
        assert!((dist_phi(&near, &a) - 0.05).abs() < 1e-12);
        assert!(in_neighbourhood(&near, &a, &Tolerance::new(0.01, 0.1).unwrap()));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 0.1).is_err());
        assert!(Tolerance::new(0.01, 0.0).is_err());
        assert!(Tolerance::new(0.01, 1.5).is_err());
        assert!(Tolerance::new(0.01, SQRT_2).is_ok());
        assert_eq!(Tolerance::default(), Tolerance::ARTICULATED);
    }
}
