//! Single constant-screw hypothesis testing on pose sequences.
//!
//! A sequence `D1..Dn` is a constant screw if every intermediate pose lies in
//! the tolerance neighbourhood of some pose on the ideal path from `D1` to
//! `Dn`, with the path parameter non-decreasing along the sequence. Two
//! hypotheses are tried in order: pure translation (orientation held at
//! `D1`'s, position moving on the segment `p1 -> pn`) and general screw (the
//! ScLERP path).

use alloc::vec::Vec;

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};
use crate::metric::{dist_p, dist_phi, Tolerance};
use crate::screw::{relative_displacement, screw_params_via_twist, Pitch, SclerpPath, ScrewParams};
use crate::vec3::Vec3;
use crate::{D_MIN, THETA_MIN};

/// Uniform samples of the coarse line-search grid.
pub const GRID_SAMPLES: usize = 257;
/// Bracket width at which golden-section refinement stops.
pub const TAU_RESOLUTION: f64 = 1e-6;

/// Ordered pose sequence with optional timestamps (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTrajectory {
    poses: Vec<UnitDualQuaternion>,
    timestamps: Option<Vec<f64>>,
}

impl PoseTrajectory {
    pub fn new(poses: Vec<UnitDualQuaternion>) -> Result<Self> {
        Self::with_timestamps(poses, None)
    }

    /// Requires at least two poses; timestamps, if present, must match in
    /// length and be strictly increasing.
    pub fn with_timestamps(poses: Vec<UnitDualQuaternion>, timestamps: Option<Vec<f64>>) -> Result<Self> {
        if poses.len() < 2 {
            return Err(Error::TooShort { min: 2, got: poses.len() });
        }
        if poses.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite { what: "pose" });
        }
        if let Some(ts) = &timestamps {
            if ts.len() != poses.len() {
                return Err(Error::LengthMismatch { expected: poses.len(), got: ts.len() });
            }
            if let Some(i) = ts.iter().position(|t| !t.is_finite()) {
                return Err(Error::NonMonotonicTime { index: i });
            }
            if let Some(i) = ts.windows(2).position(|w| w[1] <= w[0]) {
                return Err(Error::NonMonotonicTime { index: i + 1 });
            }
        }
        Ok(PoseTrajectory { poses, timestamps })
    }

    pub fn poses(&self) -> &[UnitDualQuaternion] {
        &self.poses
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn first(&self) -> &UnitDualQuaternion {
        &self.poses[0]
    }

    pub fn last(&self) -> &UnitDualQuaternion {
        &self.poses[self.poses.len() - 1]
    }

    /// Right-multiplies every pose by `frame` (a change of end-effector frame).
    pub fn reframed(&self, frame: &UnitDualQuaternion) -> PoseTrajectory {
        PoseTrajectory {
            poses: self.poses.iter().map(|p| *p * *frame).collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    /// Left-multiplies every pose by `world` (a change of world frame).
    pub fn transformed(&self, world: &UnitDualQuaternion) -> PoseTrajectory {
        PoseTrajectory {
            poses: self.poses.iter().map(|p| *world * *p).collect(),
            timestamps: self.timestamps.clone(),
        }
    }

    pub fn into_poses(self) -> Vec<UnitDualQuaternion> {
        self.poses
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    PureTranslation,
    GeneralScrew,
    NotConstantScrew,
    NoMotion,
}

impl Verdict {
    pub fn is_screw(&self) -> bool {
        matches!(self, Verdict::PureTranslation | Verdict::GeneralScrew)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScrewFitResult {
    pub verdict: Verdict,
    pub params: Option<ScrewParams>,
    /// Path parameter of each pose; empty unless the verdict is a screw.
    pub per_pose_tau: Vec<f64>,
    /// `(d_p, d_phi)` of each pose to its projection; empty unless the verdict is a screw.
    pub residuals: Vec<(f64, f64)>,
}

/// Line-search result for one pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub tau: f64,
    pub d_p: f64,
    pub d_phi: f64,
}

/// Candidate single-screw path from a first to a last pose.
#[derive(Debug, Clone, Copy)]
pub enum CandidatePath {
    /// Orientation fixed at the start, position moving linearly.
    Translation { start: UnitDualQuaternion, delta: Vec3 },
    Screw(SclerpPath),
}

impl CandidatePath {
    pub fn translation(first: &UnitDualQuaternion, last: &UnitDualQuaternion) -> Self {
        CandidatePath::Translation { start: *first, delta: last.translation() - first.translation() }
    }

    pub fn screw(first: &UnitDualQuaternion, last: &UnitDualQuaternion) -> Self {
        CandidatePath::Screw(SclerpPath::new(first, last))
    }

    #[inline]
    pub fn at(&self, tau: f64) -> UnitDualQuaternion {
        match self {
            CandidatePath::Translation { start, delta } => {
                UnitDualQuaternion::from_translation(*delta * tau) * *start
            }
            CandidatePath::Screw(path) => path.at(tau),
        }
    }

    /// The `tau` in `[tau_lo, 1]` minimizing the position distance to
    /// `target`, found by a uniform grid followed by golden-section
    /// refinement of the best cell. Tolerance is not applied here.
    pub fn closest(&self, target: &UnitDualQuaternion, tau_lo: f64) -> Projection {
        let tau_lo = tau_lo.clamp(0.0, 1.0);
        let span = 1.0 - tau_lo;
        let cost = |tau: f64| dist_p(&self.at(tau), target);
        let step = span / (GRID_SAMPLES - 1) as f64;
        let mut best_i = 0;
        let mut best = f64::INFINITY;
        for i in 0..GRID_SAMPLES {
            let c = cost(tau_lo + step * i as f64);
            if c < best {
                best = c;
                best_i = i;
            }
        }
        let mut best_tau = if best_i == GRID_SAMPLES - 1 { 1.0 } else { tau_lo + step * best_i as f64 };
        if span > 0.0 {
            let lo = tau_lo + step * best_i.saturating_sub(1) as f64;
            let hi = (tau_lo + step * (best_i + 1) as f64).min(1.0);
            let (t, c) = golden_section(&cost, lo, hi);
            if c < best {
                best = c;
                best_tau = t;
            }
        }
        Projection { tau: best_tau, d_p: best, d_phi: dist_phi(&self.at(best_tau), target) }
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > TAU_RESOLUTION {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Projects `dk` onto the ScLERP path `d1 -> dn`, searching `tau` in `[tau_lo, 1]`.
///
/// Returns the minimizing `tau` if the pose there lies within `tol` of `dk`.
pub fn project_onto_screw(
    d1: &UnitDualQuaternion,
    dn: &UnitDualQuaternion,
    dk: &UnitDualQuaternion,
    tol: &Tolerance,
    tau_lo: f64,
) -> Option<f64> {
    let p = CandidatePath::screw(d1, dn).closest(dk, tau_lo);
    tol.admits(p.d_p, p.d_phi).then_some(p.tau)
}

/// Outcome of testing one hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Pass { taus: Vec<f64>, residuals: Vec<(f64, f64)> },
    Fail,
    /// The hypothesis has no meaning for this input (no rotation for the
    /// general screw test).
    Inapplicable,
    NoMotion,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self, Check::Pass { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Hypothesis {
    PureTranslation,
    GeneralScrew,
}

/// Runs the monotone sweep of `poses[1..]` against `path`. `record` controls
/// whether per-pose data is collected. Returns `None` at the first pose that
/// falls outside the tolerance.
pub(crate) fn sweep(
    poses: &[UnitDualQuaternion],
    path: &CandidatePath,
    tol: &Tolerance,
    include_last: bool,
    record: bool,
) -> Option<(Vec<f64>, Vec<(f64, f64)>)> {
    let n = poses.len();
    let mut taus = Vec::new();
    let mut residuals = Vec::new();
    if record {
        taus.reserve(n);
        residuals.reserve(n);
        taus.push(0.0);
        residuals.push((dist_p(&path.at(0.0), &poses[0]), dist_phi(&path.at(0.0), &poses[0])));
    }
    let mut tau_lo = 0.0;
    for pose in &poses[1..n - 1] {
        let p = path.closest(pose, tau_lo);
        if !tol.admits(p.d_p, p.d_phi) {
            return None;
        }
        tau_lo = p.tau;
        if record {
            taus.push(p.tau);
            residuals.push((p.d_p, p.d_phi));
        }
    }
    let end = path.at(1.0);
    let last = (dist_p(&end, &poses[n - 1]), dist_phi(&end, &poses[n - 1]));
    if include_last && !tol.admits(last.0, last.1) {
        return None;
    }
    if record {
        taus.push(1.0);
        residuals.push(last);
    }
    Some((taus, residuals))
}

pub(crate) fn check_hypothesis(
    poses: &[UnitDualQuaternion],
    hyp: Hypothesis,
    tol: &Tolerance,
    record: bool,
) -> Check {
    let first = &poses[0];
    let last = &poses[poses.len() - 1];
    let path = match hyp {
        Hypothesis::PureTranslation => {
            if (last.translation() - first.translation()).norm() < D_MIN {
                return Check::NoMotion;
            }
            // The end orientation must also match the held orientation.
            CandidatePath::translation(first, last)
        }
        Hypothesis::GeneralScrew => {
            let (_, theta) = relative_displacement(first, last).rotation().axis_angle();
            if theta < THETA_MIN {
                return Check::Inapplicable;
            }
            CandidatePath::screw(first, last)
        }
    };
    let include_last = hyp == Hypothesis::PureTranslation;
    match sweep(poses, &path, tol, include_last, record) {
        Some((taus, residuals)) => Check::Pass { taus, residuals },
        None => Check::Fail,
    }
}

/// Pure-translation hypothesis. Slices shorter than two poses are rejected.
pub fn check_if_prismatic(poses: &[UnitDualQuaternion], tol: &Tolerance) -> Check {
    if poses.len() < 2 {
        return Check::Fail;
    }
    check_hypothesis(poses, Hypothesis::PureTranslation, tol, true)
}

/// General-screw (including pure rotation) hypothesis.
pub fn check_if_general_screw(poses: &[UnitDualQuaternion], tol: &Tolerance) -> Check {
    if poses.len() < 2 {
        return Check::Fail;
    }
    check_hypothesis(poses, Hypothesis::GeneralScrew, tol, true)
}

/// Pure-translation parameters from the end positions.
fn translation_params(first: &UnitDualQuaternion, last: &UnitDualQuaternion) -> ScrewParams {
    let delta = last.translation() - first.translation();
    let dist = delta.norm();
    ScrewParams { axis: delta / dist, moment: Vec3::ZERO, pitch: Pitch::Infinite, magnitude: dist }
}

/// Classifies and parameterizes the sequence as a single constant screw.
pub fn get_screw_parameters(traj: &PoseTrajectory, tol: &Tolerance) -> ScrewFitResult {
    fit_poses(traj.poses(), tol)
}

/// [`get_screw_parameters`] on a raw slice of at least two poses.
pub fn fit_poses(poses: &[UnitDualQuaternion], tol: &Tolerance) -> ScrewFitResult {
    classify(poses, tol, true)
}

/// Hypothesis cascade. With `record == false` only the verdict and params are
/// filled; the decisions are identical either way.
pub(crate) fn classify(poses: &[UnitDualQuaternion], tol: &Tolerance, record: bool) -> ScrewFitResult {
    let no_fit = |verdict| ScrewFitResult { verdict, params: None, per_pose_tau: Vec::new(), residuals: Vec::new() };
    if poses.len() < 2 {
        return no_fit(Verdict::NotConstantScrew);
    }
    let first = &poses[0];
    let last = &poses[poses.len() - 1];
    let rel = relative_displacement(first, last);
    let (_, theta) = rel.rotation().axis_angle();
    if theta < THETA_MIN && rel.translation().norm() < D_MIN {
        return no_fit(Verdict::NoMotion);
    }

    if poses.len() == 2 {
        let (verdict, params) = if theta < THETA_MIN {
            (Verdict::PureTranslation, translation_params(first, last))
        } else {
            match screw_params_via_twist(&rel) {
                Ok(p) => (Verdict::GeneralScrew, p),
                Err(_) => return no_fit(Verdict::NotConstantScrew),
            }
        };
        return ScrewFitResult {
            verdict,
            params: Some(params),
            per_pose_tau: alloc::vec![0.0, 1.0],
            residuals: alloc::vec![(0.0, 0.0), (0.0, 0.0)],
        };
    }

    if let Check::Pass { taus, residuals } = check_hypothesis(poses, Hypothesis::PureTranslation, tol, record) {
        return ScrewFitResult {
            verdict: Verdict::PureTranslation,
            params: Some(translation_params(first, last)),
            per_pose_tau: taus,
            residuals,
        };
    }
    if let Check::Pass { taus, residuals } = check_hypothesis(poses, Hypothesis::GeneralScrew, tol, record) {
        if let Ok(params) = screw_params_via_twist(&rel) {
            return ScrewFitResult { verdict: Verdict::GeneralScrew, params: Some(params), per_pose_tau: taus, residuals };
        }
    }
    no_fit(Verdict::NotConstantScrew)
}
