//! Screw parameters of rigid displacements, dual-quaternion powers and ScLERP.

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};
use crate::float;
use crate::quat::{Quaternion, UnitQuaternion};
use crate::vec3::{Mat3, Vec3};
use crate::{D_MIN, THETA_MIN};

/// Pitch of a screw: translation per radian, or infinite for pure translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pitch {
    Finite(f64),
    Infinite,
}

impl Pitch {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Pitch::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Pitch::Finite(h) => Some(h),
            Pitch::Infinite => None,
        }
    }
}

/// A constant screw with Pluecker axis `(axis, moment)`, pitch, and magnitude.
///
/// `magnitude` is the rotation angle (rad) for finite pitch and the
/// translation distance (m) for infinite pitch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScrewParams {
    pub axis: Vec3,
    pub moment: Vec3,
    pub pitch: Pitch,
    pub magnitude: f64,
}

impl ScrewParams {
    /// Zero-pitch screw rotating about the line through `point` along `axis`.
    pub fn revolute(axis: Vec3, point: Vec3, angle: f64) -> Self {
        Self::helical(axis, point, 0.0, angle)
    }

    pub fn helical(axis: Vec3, point: Vec3, pitch: f64, angle: f64) -> Self {
        let axis = axis.try_normalize(0.0).expect("zero screw axis");
        ScrewParams { axis, moment: point.cross(axis), pitch: Pitch::Finite(pitch), magnitude: angle }
    }

    pub fn prismatic(direction: Vec3, distance: f64) -> Self {
        let axis = direction.try_normalize(0.0).expect("zero screw axis");
        ScrewParams { axis, moment: Vec3::ZERO, pitch: Pitch::Infinite, magnitude: distance }
    }

    /// Translation along the axis, `d = h * theta` (or the magnitude itself for pure translation).
    pub fn translation(&self) -> f64 {
        match self.pitch {
            Pitch::Finite(h) => h * self.magnitude,
            Pitch::Infinite => self.magnitude,
        }
    }

    /// Rotation angle about the axis (zero for pure translation).
    pub fn rotation_angle(&self) -> f64 {
        match self.pitch {
            Pitch::Finite(_) => self.magnitude,
            Pitch::Infinite => 0.0,
        }
    }

    /// Point on the axis closest to the origin, `axis x moment`.
    pub fn axis_point(&self) -> Vec3 {
        self.axis.cross(self.moment)
    }

    pub fn with_magnitude(&self, magnitude: f64) -> Self {
        ScrewParams { magnitude, ..*self }
    }

    /// Checks the Pluecker invariants to `1e-9`.
    pub fn validate(&self) -> Result<()> {
        if !(self.axis.is_finite() && self.moment.is_finite() && self.magnitude.is_finite()) {
            return Err(Error::NonFinite { what: "screw parameters" });
        }
        if let Pitch::Finite(h) = self.pitch {
            if !h.is_finite() {
                return Err(Error::NonFinite { what: "pitch" });
            }
        }
        if (self.axis.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidScrew("axis is not a unit vector"));
        }
        if self.axis.dot(self.moment).abs() > 1e-9 {
            return Err(Error::InvalidScrew("moment is not orthogonal to the axis"));
        }
        if self.pitch.is_infinite() && self.moment != Vec3::ZERO {
            return Err(Error::InvalidScrew("pure translation must have zero moment"));
        }
        Ok(())
    }

    /// The displacement produced by moving along this screw by its magnitude.
    pub fn displacement(&self) -> UnitDualQuaternion {
        dq_from_screw(self)
    }
}

/// Unit dual quaternion `(cos(Phi/2), L sin(Phi/2))` for dual angle
/// `Phi = theta + eps d` and dual axis `L = axis + eps moment`.
pub fn dq_from_screw(s: &ScrewParams) -> UnitDualQuaternion {
    match s.pitch {
        Pitch::Infinite => UnitDualQuaternion::from_translation(s.axis * s.magnitude),
        Pitch::Finite(h) => {
            let theta = s.magnitude;
            let d = h * theta;
            let (sn, cs) = float::sin_cos(0.5 * theta);
            let real = Quaternion::new(cs, s.axis * sn);
            let dual = Quaternion::new(-0.5 * d * sn, s.axis * (0.5 * d * cs) + s.moment * sn);
            UnitDualQuaternion::from_parts_unchecked(real, dual)
        }
    }
}

/// Screw parameters of `d` by the closed form
/// `theta = 2 atan2(|p_r|, p_0)`, `d = p . axis`,
/// `m = (p x axis + (p - d axis) cot(theta/2)) / 2`.
///
/// Rotations below [`THETA_MIN`] are classified as pure translation; if the
/// translation is also below [`D_MIN`] the result is [`Error::NoMotion`].
/// The returned angle is in `[0, pi]`.
pub fn screw_params_from_dq(d: &UnitDualQuaternion) -> Result<ScrewParams> {
    let d = d.canonical();
    let pr = d.real().vector();
    let s = pr.norm();
    let theta = 2.0 * float::atan2(s, d.real().w());
    let p = d.translation();
    if theta < THETA_MIN {
        return pure_translation_params(p);
    }
    let axis = pr / s;
    let dist = p.dot(axis);
    let cot = float::cos(0.5 * theta) / float::sin(0.5 * theta);
    let moment = (p.cross(axis) + (p - axis * dist) * cot) * 0.5;
    // Strip the round-off component along the axis.
    let moment = moment - axis * axis.dot(moment);
    Ok(ScrewParams { axis, moment, pitch: Pitch::Finite(dist / theta), magnitude: theta })
}

/// Screw parameters of `d` through the twist route: solve
/// `[(I - R) hat(w) + theta w w^T] v = p`, then `h = w . v` and `m = v - h w`.
///
/// Same classification thresholds as [`screw_params_from_dq`].
pub fn screw_params_via_twist(d: &UnitDualQuaternion) -> Result<ScrewParams> {
    let d = d.canonical();
    let (axis, theta) = d.rotation().axis_angle();
    let p = d.translation();
    if theta < THETA_MIN {
        return pure_translation_params(p);
    }
    let r = d.rotation().to_matrix();
    let a = Mat3::IDENTITY.sub(&r).mul_mat(&Mat3::hat(axis)).add(&Mat3::outer(axis, axis).scale(theta));
    let v = a.solve(p).ok_or(Error::InvalidScrew("singular twist system"))?;
    let h = axis.dot(v);
    let moment = v - axis * h;
    Ok(ScrewParams { axis, moment, pitch: Pitch::Finite(h), magnitude: theta })
}

fn pure_translation_params(p: Vec3) -> Result<ScrewParams> {
    let dist = p.norm();
    if dist < D_MIN {
        return Err(Error::NoMotion);
    }
    Ok(ScrewParams { axis: p / dist, moment: Vec3::ZERO, pitch: Pitch::Infinite, magnitude: dist })
}

/// Precomputed screw coordinates of a displacement for repeated powers.
///
/// Holds the canonical representative's axis, angle, axial translation and
/// translation vector. Unlike [`screw_params_from_dq`] there is no
/// classification threshold: any non-zero rotation is treated as a screw, so
/// `power(1)` reproduces the input to round-off.
#[derive(Debug, Clone, Copy)]
pub struct ScrewPower {
    axis: Vec3,
    theta: f64,
    dist: f64,
    translation: Vec3,
    // cos(theta/2) / sin(theta/2)
    cot_half: f64,
}

impl ScrewPower {
    pub fn new(d: &UnitDualQuaternion) -> Self {
        let d = d.canonical();
        let pr = d.real().vector();
        let s = pr.norm();
        let translation = d.translation();
        if s == 0.0 {
            return ScrewPower { axis: Vec3::ZERO, theta: 0.0, dist: 0.0, translation, cot_half: 0.0 };
        }
        let w = d.real().w();
        let axis = pr / s;
        let theta = 2.0 * float::atan2(s, w);
        ScrewPower { axis, theta, dist: translation.dot(axis), translation, cot_half: w / s }
    }

    pub fn angle(&self) -> f64 {
        self.theta
    }

    /// `D^tau`: same axis and pitch, angle and translation scaled by `tau`.
    #[inline]
    pub fn power(&self, tau: f64) -> UnitDualQuaternion {
        if self.theta == 0.0 {
            return UnitDualQuaternion::from_translation(self.translation * tau);
        }
        let (sn, cs) = float::sin_cos(0.5 * tau * self.theta);
        let p = self.translation;
        let w = self.axis;
        // sin(tau theta/2) * m, expanded so it stays finite as theta -> 0.
        let sin_m = (p.cross(w) * sn + (p - w * self.dist) * (sn * self.cot_half)) * 0.5;
        let td = tau * self.dist;
        let real = Quaternion::new(cs, w * sn);
        let dual = Quaternion::new(-0.5 * td * sn, w * (0.5 * td * cs) + sin_m);
        UnitDualQuaternion::from_parts_unchecked(real, dual)
    }
}

/// `D^tau` along the screw of `D` (the representative with angle in `[0, pi]`).
/// The identity maps to the identity for every `tau`.
pub fn dq_power(d: &UnitDualQuaternion, tau: f64) -> UnitDualQuaternion {
    ScrewPower::new(d).power(tau)
}

/// Screw-linear interpolation `D1 (D1^-1 D2)^tau` for `tau` in `[0, 1]`,
/// along the shorter rotation.
pub fn sclerp(d1: &UnitDualQuaternion, d2: &UnitDualQuaternion, tau: f64) -> Result<UnitDualQuaternion> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::TauOutOfRange { tau });
    }
    Ok(sclerp_extrapolate(d1, d2, tau))
}

/// [`sclerp`] without the range check on `tau`.
pub fn sclerp_extrapolate(d1: &UnitDualQuaternion, d2: &UnitDualQuaternion, tau: f64) -> UnitDualQuaternion {
    *d1 * dq_power(&(d1.conjugate() * *d2), tau)
}

/// A ScLERP path from `start` to `end` with the relative screw precomputed.
#[derive(Debug, Clone, Copy)]
pub struct SclerpPath {
    start: UnitDualQuaternion,
    rel: ScrewPower,
}

impl SclerpPath {
    pub fn new(start: &UnitDualQuaternion, end: &UnitDualQuaternion) -> Self {
        SclerpPath { start: *start, rel: ScrewPower::new(&(start.conjugate() * *end)) }
    }

    #[inline]
    pub fn at(&self, tau: f64) -> UnitDualQuaternion {
        self.start * self.rel.power(tau)
    }
}

/// Spatial relative displacement `to * from*`, so that `to = rel * from`.
pub fn relative_displacement(from: &UnitDualQuaternion, to: &UnitDualQuaternion) -> UnitDualQuaternion {
    *to * from.conjugate()
}

/// Rotation-matrix power through axis-angle, used as an independent check.
pub fn rotation_fraction(q: &UnitQuaternion, tau: f64) -> UnitQuaternion {
    let (axis, angle) = q.axis_angle();
    UnitQuaternion::from_axis_angle(axis, angle * tau)
}
