use core::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::float;
use crate::vec3::{Mat3, Vec3};

/// Largest norm deviation that constructors silently repair by normalizing.
pub const UNIT_REPAIR_LIMIT: f64 = 1e-6;

/// Quaternion `(w, v)` with scalar part `w` and imaginary part `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub v: Vec3,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion::new(1.0, Vec3::ZERO);
    pub const ZERO: Quaternion = Quaternion::new(0.0, Vec3::ZERO);

    pub const fn new(w: f64, v: Vec3) -> Self {
        Quaternion { w, v }
    }

    pub fn from_wxyz(q: [f64; 4]) -> Self {
        Quaternion::new(q[0], Vec3::new(q[1], q[2], q[3]))
    }

    pub fn to_wxyz(self) -> [f64; 4] {
        [self.w, self.v.x, self.v.y, self.v.z]
    }

    /// Pure quaternion `(0, v)`.
    pub fn pure(v: Vec3) -> Self {
        Quaternion::new(0.0, v)
    }

    pub fn conjugate(self) -> Self {
        Quaternion::new(self.w, -self.v)
    }

    pub fn dot(self, o: Quaternion) -> f64 {
        self.w * o.w + self.v.dot(o.v)
    }

    pub fn norm(self) -> f64 {
        float::sqrt(self.dot(self))
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.v * s)
    }

    pub fn max_abs(self) -> f64 {
        self.w.abs().max(self.v.max_abs())
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.v.is_finite()
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * q.w - self.v.dot(q.v),
            q.v * self.w + self.v * q.w + self.v.cross(q.v),
        )
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, q: Quaternion) -> Quaternion {
        Quaternion::new(self.w + q.w, self.v + q.v)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, q: Quaternion) -> Quaternion {
        Quaternion::new(self.w - q.w, self.v - q.v)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.v)
    }
}

/// A quaternion of unit norm, representing a rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::IDENTITY);

    /// Accepts `q` if its norm is within [`UNIT_REPAIR_LIMIT`] of one,
    /// normalizing it.
    pub fn new(q: Quaternion) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::NonFinite { what: "quaternion" });
        }
        let n = q.norm();
        if (n - 1.0).abs() > UNIT_REPAIR_LIMIT {
            return Err(Error::NotUnit { norm: n });
        }
        Ok(Self::new_normalize(q))
    }

    /// Normalizes any non-zero quaternion. Input already unit to rounding
    /// error is kept bit for bit, so stored poses survive reload unchanged.
    pub fn new_normalize(q: Quaternion) -> Self {
        let n2 = q.dot(q);
        if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON {
            return UnitQuaternion(q);
        }
        UnitQuaternion(q.scale(1.0 / float::sqrt(n2)))
    }

    /// Caller guarantees `q` is unit.
    pub(crate) const fn new_unchecked(q: Quaternion) -> Self {
        UnitQuaternion(q)
    }

    /// Rotation by `angle` radians about the unit vector `axis`.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let (s, c) = float::sin_cos(angle * 0.5);
        UnitQuaternion::new_normalize(Quaternion::new(c, axis * s))
    }

    pub fn quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn w(&self) -> f64 {
        self.0.w
    }

    pub fn vector(&self) -> Vec3 {
        self.0.v
    }

    pub fn inverse(&self) -> Self {
        UnitQuaternion(self.0.conjugate())
    }

    /// The same rotation with the opposite sign (the other element of the double cover).
    pub fn antipode(&self) -> Self {
        UnitQuaternion(-self.0)
    }

    pub fn rotate(&self, p: Vec3) -> Vec3 {
        let q = self.0;
        // p + 2w (v x p) + 2 v x (v x p)
        let t = q.v.cross(p) * 2.0;
        p + t * q.w + q.v.cross(t)
    }

    /// Rotation angle in `[0, pi]` and axis (arbitrary when the angle is zero).
    pub fn axis_angle(&self) -> (Vec3, f64) {
        let q = if self.0.w < 0.0 { -self.0 } else { self.0 };
        let s = q.v.norm();
        let angle = 2.0 * float::atan2(s, q.w);
        let axis = if s > 0.0 { q.v / s } else { Vec3::Z };
        (axis, angle)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let Quaternion { w, v } = self.0;
        let (x, y, z) = (v.x, v.y, v.z);
        Mat3([
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ])
    }

    /// Converts a rotation matrix, requiring `max |R^T R - I| < 1e-6` and `det R > 0`.
    pub fn from_matrix(r: &Mat3) -> Result<Self> {
        let dev = r.transpose().mul_mat(r).sub(&Mat3::IDENTITY).max_abs();
        if !dev.is_finite() {
            return Err(Error::NonFinite { what: "rotation matrix" });
        }
        if dev >= 1e-6 || r.determinant() <= 0.0 {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
        let m = &r.0;
        let trace = m[0][0] + m[1][1] + m[2][2];
        // Shepperd's method: pivot on the largest of w, x, y, z.
        let q = if trace > 0.0 {
            let s = float::sqrt(trace + 1.0) * 2.0;
            Quaternion::new(
                0.25 * s,
                Vec3::new((m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s),
            )
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = float::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2.0;
            Quaternion::new(
                (m[2][1] - m[1][2]) / s,
                Vec3::new(0.25 * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s),
            )
        } else if m[1][1] > m[2][2] {
            let s = float::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2.0;
            Quaternion::new(
                (m[0][2] - m[2][0]) / s,
                Vec3::new((m[0][1] + m[1][0]) / s, 0.25 * s, (m[1][2] + m[2][1]) / s),
            )
        } else {
            let s = float::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2.0;
            Quaternion::new(
                (m[1][0] - m[0][1]) / s,
                Vec3::new((m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, 0.25 * s),
            )
        };
        Ok(UnitQuaternion::new_normalize(q))
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, o: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion(self.0 * o.0)
    }
}
