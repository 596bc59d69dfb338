use core::ops::Mul;

use crate::error::{Error, Result};
use crate::quat::{Quaternion, UnitQuaternion, UNIT_REPAIR_LIMIT};
use crate::vec3::{Mat3, Vec3};

/// Rigid displacement `real + eps * dual` with `|real| = 1` and
/// `real . dual = 0` (the 4-vector dot product).
///
/// The dual part is `0.5 * (0, p) * real` for translation `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDualQuaternion {
    real: UnitQuaternion,
    dual: Quaternion,
}

/// A pose given as rotation plus position (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion,
    pub position: Vec3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose { rotation: UnitQuaternion::IDENTITY, position: Vec3::ZERO };

    pub fn new(rotation: UnitQuaternion, position: Vec3) -> Self {
        Pose { rotation, position }
    }

    pub fn to_dq(&self) -> UnitDualQuaternion {
        UnitDualQuaternion::from_rotation_translation(self.rotation, self.position)
    }

    /// Row-major homogeneous matrix.
    pub fn to_matrix(&self) -> [f64; 16] {
        let r = self.rotation.to_matrix().0;
        let p = self.position;
        [
            r[0][0], r[0][1], r[0][2], p.x, //
            r[1][0], r[1][1], r[1][2], p.y, //
            r[2][0], r[2][1], r[2][2], p.z, //
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    /// Parses a row-major homogeneous matrix, checking orthonormality of the
    /// rotation block and the bottom row.
    pub fn from_matrix(m: &[f64; 16]) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        let bottom = [m[12], m[13], m[14], m[15] - 1.0];
        let bottom_dev = bottom.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if bottom_dev >= 1e-6 {
            return Err(Error::NotOrthonormal { deviation: bottom_dev });
        }
        let r = Mat3([[m[0], m[1], m[2]], [m[4], m[5], m[6]], [m[8], m[9], m[10]]]);
        Ok(Pose {
            rotation: UnitQuaternion::from_matrix(&r)?,
            position: Vec3::new(m[3], m[7], m[11]),
        })
    }
}

impl UnitDualQuaternion {
    pub const IDENTITY: UnitDualQuaternion =
        UnitDualQuaternion { real: UnitQuaternion::IDENTITY, dual: Quaternion::ZERO };

    pub fn from_rotation_translation(rotation: UnitQuaternion, translation: Vec3) -> Self {
        let dual = (Quaternion::pure(translation) * rotation.quaternion()).scale(0.5);
        UnitDualQuaternion { real: rotation, dual }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::from_rotation_translation(UnitQuaternion::IDENTITY, t)
    }

    pub fn from_rotation(r: UnitQuaternion) -> Self {
        UnitDualQuaternion { real: r, dual: Quaternion::ZERO }
    }

    /// Builds from raw parts. Deviations from unitness up to `1e-6` are
    /// repaired by normalizing the real part and projecting the dual part;
    /// anything larger is rejected.
    pub fn from_parts(real: Quaternion, dual: Quaternion) -> Result<Self> {
        if !dual.is_finite() {
            return Err(Error::NonFinite { what: "dual quaternion" });
        }
        let n = real.norm();
        let real = UnitQuaternion::new(real)?;
        let dual = dual.scale(1.0 / n);
        let r = real.quaternion();
        let off = r.dot(dual);
        if off.abs() > UNIT_REPAIR_LIMIT {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(UnitDualQuaternion { real, dual: dual - r.scale(off) })
    }

    /// Caller guarantees the unit conditions hold.
    pub(crate) fn from_parts_unchecked(real: Quaternion, dual: Quaternion) -> Self {
        UnitDualQuaternion { real: UnitQuaternion::new_unchecked(real), dual }
    }

    /// Re-establishes the unit conditions after accumulated round-off.
    pub fn renormalize(&self) -> Self {
        let n = self.real.quaternion().norm();
        let r = self.real.quaternion().scale(1.0 / n);
        let d = self.dual.scale(1.0 / n);
        UnitDualQuaternion { real: UnitQuaternion::new_unchecked(r), dual: d - r.scale(r.dot(d)) }
    }

    pub fn real(&self) -> UnitQuaternion {
        self.real
    }

    pub fn dual(&self) -> Quaternion {
        self.dual
    }

    pub fn rotation(&self) -> UnitQuaternion {
        self.real
    }

    /// Translation `p` recovered from `2 Q P* = (0, p)`.
    pub fn translation(&self) -> Vec3 {
        (self.dual * self.real.quaternion().conjugate()).scale(2.0).v
    }

    pub fn to_pose(&self) -> Pose {
        Pose { rotation: self.real, position: self.translation() }
    }

    /// `D* = P* + eps Q*`; the group inverse for unit dual quaternions.
    pub fn conjugate(&self) -> Self {
        UnitDualQuaternion { real: self.real.inverse(), dual: self.dual.conjugate() }
    }

    pub fn inverse(&self) -> Self {
        self.conjugate()
    }

    /// `D† = P* - eps Q*`. Not used by the algorithms here.
    pub fn dual_conjugate(&self) -> (Quaternion, Quaternion) {
        (self.real.quaternion().conjugate(), -self.dual.conjugate())
    }

    /// `-D`, which encodes the same rigid displacement.
    pub fn antipode(&self) -> Self {
        UnitDualQuaternion { real: self.real.antipode(), dual: -self.dual }
    }

    /// Representative with non-negative real scalar part.
    pub fn canonical(&self) -> Self {
        if self.real.w() < 0.0 {
            self.antipode()
        } else {
            *self
        }
    }

    /// Applies the displacement to a point.
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.real.rotate(p) + self.translation()
    }

    /// Largest deviation from the unit conditions (norm and Pluecker).
    pub fn unit_defect(&self) -> f64 {
        let r = self.real.quaternion();
        let norm_dev = (r.norm() - 1.0).abs();
        let cross = r * self.dual.conjugate() + self.dual * r.conjugate();
        norm_dev.max(cross.max_abs())
    }

    /// Largest componentwise difference, comparing both sign representatives.
    pub fn max_abs_diff(&self, o: &UnitDualQuaternion) -> f64 {
        let same = (self.real.quaternion() - o.real.quaternion())
            .max_abs()
            .max((self.dual - o.dual).max_abs());
        let flip = (self.real.quaternion() + o.real.quaternion())
            .max_abs()
            .max((self.dual + o.dual).max_abs());
        same.min(flip)
    }

    pub fn is_finite(&self) -> bool {
        self.real.quaternion().is_finite() && self.dual.is_finite()
    }
}

impl Mul for UnitDualQuaternion {
    type Output = UnitDualQuaternion;
    #[inline]
    fn mul(self, o: UnitDualQuaternion) -> UnitDualQuaternion {
        let p1 = self.real.quaternion();
        let p2 = o.real.quaternion();
        UnitDualQuaternion {
            real: UnitQuaternion::new_unchecked(p1 * p2),
            dual: p1 * o.dual + self.dual * p2,
        }
    }
}

impl From<Pose> for UnitDualQuaternion {
    fn from(p: Pose) -> Self {
        p.to_dq()
    }
}

impl From<UnitDualQuaternion> for Pose {
    fn from(d: UnitDualQuaternion) -> Self {
        d.to_pose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn translation_encoding() {
        let d = Pose::new(UnitQuaternion::IDENTITY, Vec3::new(1.0, 2.0, 3.0)).to_dq();
        assert_eq!(d.dual().to_wxyz(), [0.0, 0.5, 1.0, 1.5]);
        assert_eq!(Pose::IDENTITY.to_dq(), UnitDualQuaternion::IDENTITY);
    }

    #[test]
    fn translations_add() {
        let a = UnitDualQuaternion::from_translation(Vec3::new(0.0, 0.0, 0.1));
        let b = UnitDualQuaternion::from_translation(Vec3::new(0.0, 0.0, 0.2));
        let c = a * b;
        assert!((c.translation() - Vec3::new(0.0, 0.0, 0.3)).max_abs() < 1e-15);
        assert!(c.max_abs_diff(&UnitDualQuaternion::from_translation(Vec3::new(0.0, 0.0, 0.3))) < 1e-15);
    }

    #[test]
    fn times_conjugate_is_identity() {
        let d = UnitDualQuaternion::from_rotation_translation(
            UnitQuaternion::from_axis_angle(Vec3::new(0.0, 0.6, 0.8), 2.0),
            Vec3::new(0.3, -1.0, 2.0),
        );
        assert!((d * d.conjugate()).max_abs_diff(&UnitDualQuaternion::IDENTITY) < 1e-15);
        assert!((UnitDualQuaternion::IDENTITY * d).max_abs_diff(&d) == 0.0);
        assert!(d.unit_defect() < 1e-15);
    }

    #[test]
    fn composition_acts_on_points_like_matrices() {
        let a = UnitDualQuaternion::from_rotation_translation(
            UnitQuaternion::from_axis_angle(Vec3::Z, FRAC_PI_2),
            Vec3::new(1.0, 0.0, 0.0),
        );
        let b = UnitDualQuaternion::from_translation(Vec3::new(0.0, 2.0, 0.0));
        let p = Vec3::new(0.5, 0.5, 0.5);
        let via_dq = (a * b).transform_point(p);
        let via_parts = a.transform_point(b.transform_point(p));
        assert!((via_dq - via_parts).max_abs() < 1e-15);
    }

    #[test]
    fn matrix_boundary() {
        let pose = Pose::new(UnitQuaternion::from_axis_angle(Vec3::X, 0.4), Vec3::new(1.0, 2.0, 3.0));
        let back = Pose::from_matrix(&pose.to_matrix()).unwrap();
        assert!((back.position - pose.position).max_abs() < 1e-15);
        let mut bad = pose.to_matrix();
        bad[15] = 2.0;
        assert!(Pose::from_matrix(&bad).is_err());
        bad = pose.to_matrix();
        bad[0] *= 1.1;
        assert!(matches!(Pose::from_matrix(&bad), Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn from_parts_repairs_small_defects_only() {
        let d = UnitDualQuaternion::from_rotation_translation(
            UnitQuaternion::from_axis_angle(Vec3::Y, 0.7),
            Vec3::new(0.1, 0.2, 0.3),
        );
        let real = d.real().quaternion().scale(1.0 + 1e-7);
        let fixed = UnitDualQuaternion::from_parts(real, d.dual()).unwrap();
        assert!(fixed.unit_defect() < 1e-15);
        assert!(UnitDualQuaternion::from_parts(real.scale(1.5), d.dual()).is_err());
        assert!(UnitDualQuaternion::from_parts(d.real().quaternion(), d.dual() + d.real().quaternion().scale(0.1)).is_err());
    }
}
