//! Greedy partition of a trajectory into maximal constant-screw segments.
//!
//! Starting at pose `i`, the window `[i, j]` grows while it still fits a
//! single constant screw. When `[i, j + 1]` fails, `[i, j]` is emitted and the
//! next window starts at `j`, so consecutive segments share their boundary
//! pose. A window whose ends coincide is accepted only while every pose in it
//! stays in the neighbourhood of its first pose, so pauses are absorbed into
//! the surrounding segment.

use alloc::vec::Vec;

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};
use crate::extraction::{classify, PoseTrajectory, ScrewFitResult, Verdict};
use crate::metric::{dist_p, dist_phi, in_neighbourhood, Tolerance};
use crate::screw::{ScrewParams, SclerpPath};

/// Max and mean of the per-pose `(d_p, d_phi)` fit residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualStats {
    pub max_p: f64,
    pub max_phi: f64,
    pub mean_p: f64,
    pub mean_phi: f64,
}

impl ResidualStats {
    pub fn from_residuals(res: &[(f64, f64)]) -> Self {
        if res.is_empty() {
            return ResidualStats::default();
        }
        let n = res.len() as f64;
        ResidualStats {
            max_p: res.iter().fold(0.0_f64, |a, r| a.max(r.0)),
            max_phi: res.iter().fold(0.0_f64, |a, r| a.max(r.1)),
            mean_p: res.iter().map(|r| r.0).sum::<f64>() / n,
            mean_phi: res.iter().map(|r| r.1).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrewSegment {
    /// Index of the first pose (shared with the previous segment's end).
    pub start_index: usize,
    /// Index of the last pose, inclusive.
    pub end_index: usize,
    pub start_pose: UnitDualQuaternion,
    pub end_pose: UnitDualQuaternion,
    /// `PureTranslation`, `GeneralScrew`, or `NoMotion` for a segment that is
    /// nothing but a pause.
    pub verdict: Verdict,
    /// Absent only for `NoMotion` segments.
    pub params: Option<ScrewParams>,
    pub residual_stats: ResidualStats,
}

impl ScrewSegment {
    /// Number of relative displacements spanned.
    pub fn span(&self) -> usize {
        self.end_index - self.start_index
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub segments: Vec<ScrewSegment>,
    pub source_len: usize,
}

impl Segmentation {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Interior boundary indices (the end index of every segment but the last).
    pub fn breakpoints(&self) -> Vec<usize> {
        let n = self.segments.len();
        self.segments.iter().take(n.saturating_sub(1)).map(|s| s.end_index).collect()
    }

    /// Segment end poses `E1..Eu`.
    pub fn end_poses(&self) -> Vec<UnitDualQuaternion> {
        self.segments.iter().map(|s| s.end_pose).collect()
    }

    /// Checks contiguous tiling of `[0, source_len - 1]`.
    pub fn is_tiling(&self) -> bool {
        let Some(first) = self.segments.first() else {
            return false;
        };
        first.start_index == 0
            && self.segments.last().map(|s| s.end_index) == Some(self.source_len - 1)
            && self.segments.iter().all(|s| s.start_index < s.end_index)
            && self.segments.windows(2).all(|w| w[0].end_index == w[1].start_index)
    }
}

/// Whether `poses` (one candidate window) is accepted as a single segment.
///
/// `fit` must be the cascade's answer for this window.
pub(crate) fn window_accepts(poses: &[UnitDualQuaternion], fit: &ScrewFitResult, tol: &Tolerance) -> bool {
    if poses.len() <= 2 {
        return true;
    }
    match fit.verdict {
        Verdict::PureTranslation | Verdict::GeneralScrew => true,
        Verdict::NoMotion => poses.iter().all(|p| in_neighbourhood(p, &poses[0], tol)),
        Verdict::NotConstantScrew => false,
    }
}

fn build_segment(poses: &[UnitDualQuaternion], start: usize, end: usize, tol: &Tolerance) -> ScrewSegment {
    let window = &poses[start..=end];
    let fit = classify(window, tol, true);
    let stats = match fit.verdict {
        Verdict::NoMotion => {
            let res: Vec<_> = window.iter().map(|p| (dist_p(p, &window[0]), dist_phi(p, &window[0]))).collect();
            ResidualStats::from_residuals(&res)
        }
        _ => ResidualStats::from_residuals(&fit.residuals),
    };
    ScrewSegment {
        start_index: start,
        end_index: end,
        start_pose: poses[start],
        end_pose: poses[end],
        verdict: fit.verdict,
        params: fit.params,
        residual_stats: stats,
    }
}

/// Greedy longest-prefix segmentation of `traj` into constant screws.
pub fn get_screw_segments(traj: &PoseTrajectory, tol: &Tolerance) -> Segmentation {
    let poses = traj.poses();
    let n = poses.len();
    let mut segments = Vec::new();
    let mut i = 0;
    while i < n - 1 {
        let mut j = i + 1;
        while j + 1 < n {
            let window = &poses[i..=j + 1];
            // Verdict-only evaluation: no per-pose bookkeeping while growing.
            let fit = classify(window, tol, false);
            if !window_accepts(window, &fit, tol) {
                break;
            }
            j += 1;
        }
        segments.push(build_segment(poses, i, j, tol));
        i = j;
    }
    Segmentation { segments, source_len: n }
}

/// Dense trajectory through `D1, E1, ..., Eu`, ScLERP-interpolated with
/// `samples_per_segment` steps per segment.
pub fn reconstruct(seg: &Segmentation, samples_per_segment: usize) -> Result<PoseTrajectory> {
    if samples_per_segment == 0 {
        return Err(Error::ZeroSamples);
    }
    let first = seg.segments.first().ok_or(Error::TooShort { min: 1, got: 0 })?;
    let mut poses = Vec::with_capacity(seg.segments.len() * samples_per_segment + 1);
    poses.push(first.start_pose);
    for s in &seg.segments {
        let path = SclerpPath::new(&s.start_pose, &s.end_pose);
        for k in 1..samples_per_segment {
            poses.push(path.at(k as f64 / samples_per_segment as f64));
        }
        poses.push(s.end_pose);
    }
    PoseTrajectory::new(poses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::UnitQuaternion;
    use crate::screw::dq_power;
    use crate::vec3::Vec3;
    use alloc::vec;

    fn leg(screw: &ScrewParams, start: &UnitDualQuaternion, count: usize) -> Vec<UnitDualQuaternion> {
        let d = screw.displacement();
        (1..=count).map(|k| dq_power(&d, k as f64 / count as f64) * *start).collect()
    }

    fn start() -> UnitDualQuaternion {
        UnitDualQuaternion::from_rotation_translation(UnitQuaternion::from_axis_angle(Vec3::X, 0.2), Vec3::new(0.1, 0.5, 0.2))
    }

    fn tight() -> Tolerance {
        Tolerance::new(1e-5, 1e-5).unwrap()
    }

    #[test]
    fn single_screw_is_one_segment() {
        let s = start();
        let mut poses = vec![s];
        poses.extend(leg(&ScrewParams::helical(Vec3::Y, Vec3::new(0.3, 0.0, 0.0), 0.01, 1.0), &s, 49));
        let traj = PoseTrajectory::new(poses.clone()).unwrap();
        let seg = get_screw_segments(&traj, &Tolerance::ARTICULATED);
        assert_eq!(seg.len(), 1);
        assert_eq!(seg.segments[0].end_pose, poses[49]);
        assert!(seg.is_tiling());
    }

    #[test]
    fn rotation_then_translation_breaks_at_the_corner() {
        let s = start();
        let mut poses = vec![s];
        poses.extend(leg(&ScrewParams::revolute(Vec3::Z, Vec3::new(0.5, 0.2, 0.0), 60f64.to_radians()), &s, 50));
        let corner = poses[50];
        poses.extend(leg(&ScrewParams::prismatic(Vec3::X, 0.2), &corner, 50));
        let seg = get_screw_segments(&PoseTrajectory::new(poses).unwrap(), &tight());
        assert_eq!(seg.breakpoints(), vec![50]);
        assert_eq!(seg.segments[0].verdict, Verdict::GeneralScrew);
        assert!(seg.segments[0].params.unwrap().pitch.finite().unwrap().abs() < 1e-9);
        assert_eq!(seg.segments[1].verdict, Verdict::PureTranslation);
        assert!(seg.is_tiling());
    }

    #[test]
    fn pauses_are_absorbed() {
        let s = start();
        let mut poses = vec![s, s, s];
        poses.extend(leg(&ScrewParams::prismatic(Vec3::Z, 0.1), &s, 10));
        let end = *poses.last().unwrap();
        poses.extend([end, end]);
        let seg = get_screw_segments(&PoseTrajectory::new(poses).unwrap(), &Tolerance::ARTICULATED);
        assert_eq!(seg.len(), 1);
        assert_eq!(seg.segments[0].verdict, Verdict::PureTranslation);

        let still = get_screw_segments(&PoseTrajectory::new(vec![s, s, s]).unwrap(), &Tolerance::ARTICULATED);
        assert_eq!(still.len(), 1);
        assert_eq!(still.segments[0].verdict, Verdict::NoMotion);
        assert!(still.segments[0].params.is_none());
    }

    #[test]
    fn reconstruction_follows_segments() {
        let s = start();
        let mut poses = vec![s];
        let screw = ScrewParams::revolute(Vec3::Z, Vec3::new(0.5, 0.2, 0.0), 1.0);
        poses.extend(leg(&screw, &s, 20));
        let seg = get_screw_segments(&PoseTrajectory::new(poses).unwrap(), &Tolerance::ARTICULATED);
        let dense = reconstruct(&seg, 7).unwrap();
        assert_eq!(dense.len(), 8);
        let d = screw.displacement();
        for (k, p) in dense.poses().iter().enumerate() {
            let truth = dq_power(&d, k as f64 / 7.0) * s;
            assert!(p.max_abs_diff(&truth) < 1e-9);
        }
        assert_eq!(reconstruct(&seg, 0), Err(Error::ZeroSamples));
    }

    #[test]
    fn final_failure_emits_terminal_segment() {
        let s = start();
        let mut poses = vec![s];
        poses.extend(leg(&ScrewParams::prismatic(Vec3::X, 0.3), &s, 10));
        let last = *poses.last().unwrap();
        poses.push(UnitDualQuaternion::from_translation(Vec3::new(0.0, 0.2, 0.0)) * last);
        let seg = get_screw_segments(&PoseTrajectory::new(poses).unwrap(), &tight());
        assert_eq!(seg.len(), 2);
        assert_eq!((seg.segments[1].start_index, seg.segments[1].end_index), (10, 11));
    }
}
