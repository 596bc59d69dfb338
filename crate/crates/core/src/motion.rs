//! Task-space motion generation from extracted screws.
//!
//! Articulated objects: replay one extracted screw with a new magnitude from
//! a new start pose. Complex tasks: keep the segment end poses that fall in
//! an object's region of interest, store them in that object's frame, map
//! them through the object's new pose, and interpolate through the resulting
//! guiding poses with ScLERP.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};
use crate::extraction::PoseTrajectory;
use crate::float;
use crate::metric::{dist_p, dist_phi};
use crate::screw::{screw_params_from_dq, Pitch, SclerpPath, ScrewParams};
use crate::segmentation::Segmentation;
use crate::vec3::Vec3;

/// Default ROI radius for containers such as bowls (m).
pub const CONTAINER_ROI_RADIUS: f64 = 0.20;
/// Default ROI radius for handheld objects (m).
pub const HANDHELD_ROI_RADIUS: f64 = 0.15;
/// Default ROI cube side for racks (m).
pub const RACK_ROI_SIDE: f64 = 0.45;

/// Guiding poses closer than this in both distances are merged.
const DUPLICATE_EPS: f64 = 1e-9;

/// Region of interest centred at an object frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionOfInterest {
    Sphere { radius: f64 },
    Cuboid { half_extents: Vec3 },
}

impl RegionOfInterest {
    pub fn sphere(radius: f64) -> Result<Self> {
        let roi = RegionOfInterest::Sphere { radius };
        roi.validate()?;
        Ok(roi)
    }

    pub fn cuboid(half_extents: Vec3) -> Result<Self> {
        let roi = RegionOfInterest::Cuboid { half_extents };
        roi.validate()?;
        Ok(roi)
    }

    pub fn cube(side: f64) -> Result<Self> {
        Self::cuboid(Vec3::new(side, side, side) * 0.5)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RegionOfInterest::Sphere { radius } => radius.is_finite() && radius > 0.0,
            RegionOfInterest::Cuboid { half_extents: h } => {
                h.is_finite() && h.x > 0.0 && h.y > 0.0 && h.z > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRegion)
        }
    }

    /// Membership of a point given in the object frame. Boundary counts as inside.
    pub fn contains(&self, local: Vec3) -> bool {
        match *self {
            RegionOfInterest::Sphere { radius } => local.norm() <= radius,
            RegionOfInterest::Cuboid { half_extents: h } => {
                local.x.abs() <= h.x && local.y.abs() <= h.y && local.z.abs() <= h.z
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: String,
    pub pose: UnitDualQuaternion,
    pub roi: RegionOfInterest,
}

/// Task-relevant objects, in a fixed order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TaskScene {
    objects: Vec<SceneObject>,
}

impl TaskScene {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self> {
        for (i, o) in objects.iter().enumerate() {
            o.roi.validate()?;
            if objects[..i].iter().any(|p| p.id == o.id) {
                return Err(Error::DuplicateObject(o.id.clone()));
            }
        }
        Ok(TaskScene { objects })
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn get(&self, id: &str) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// The same scene with every object pose left-multiplied by `t`.
    pub fn transformed(&self, t: &UnitDualQuaternion) -> TaskScene {
        TaskScene {
            objects: self.objects.iter().map(|o| SceneObject { pose: *t * o.pose, ..o.clone() }).collect(),
        }
    }
}

/// One key segment end pose in its object's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyPose {
    /// Index into the source segmentation.
    pub segment_index: usize,
    pub local: UnitDualQuaternion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectConstraints {
    pub object_id: String,
    pub key_poses: Vec<KeyPose>,
}

/// Per-object key poses, in scene order.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskConstraintSet {
    pub objects: Vec<ObjectConstraints>,
}

impl TaskConstraintSet {
    pub fn get(&self, id: &str) -> Option<&ObjectConstraints> {
        self.objects.iter().find(|o| o.object_id == id)
    }
}

/// Selects, for every object, the segment end poses inside its region of
/// interest and expresses them in the object frame (`O* x E`).
///
/// An end pose inside several regions goes to the object whose origin is
/// nearest; exact ties go to the earlier object in the scene.
pub fn extract_key_segments(seg: &Segmentation, scene: &TaskScene) -> TaskConstraintSet {
    let mut objects: Vec<ObjectConstraints> = scene
        .objects()
        .iter()
        .map(|o| ObjectConstraints { object_id: o.id.clone(), key_poses: Vec::new() })
        .collect();
    for (segment_index, s) in seg.segments.iter().enumerate() {
        let mut best: Option<(usize, f64, UnitDualQuaternion)> = None;
        for (oi, o) in scene.objects().iter().enumerate() {
            let local = o.pose.conjugate() * s.end_pose;
            let offset = local.translation();
            if !o.roi.contains(offset) {
                continue;
            }
            let d = offset.norm();
            if best.is_none_or(|(_, bd, _)| d < bd) {
                best = Some((oi, d, local));
            }
        }
        if let Some((oi, _, local)) = best {
            objects[oi].key_poses.push(KeyPose { segment_index, local });
        }
    }
    TaskConstraintSet { objects }
}

/// Key poses of one object mapped into the world through its new pose.
#[derive(Debug, Clone, PartialEq)]
pub struct ReanchoredObject {
    pub object_id: String,
    pub poses: Vec<UnitDualQuaternion>,
    pub segment_indices: Vec<usize>,
}

/// Maps stored local key poses through the new object poses, `O' x O* x G`.
///
/// The result is ordered by the demonstration index of each object's first
/// key segment; objects without key segments come last in scene order.
pub fn reanchor(
    constraints: &TaskConstraintSet,
    scene_old: &TaskScene,
    scene_new: &TaskScene,
) -> Result<Vec<ReanchoredObject>> {
    for o in scene_old.objects() {
        if scene_new.get(&o.id).is_none() {
            return Err(Error::UnknownObject(o.id.clone()));
        }
    }
    for o in scene_new.objects() {
        if scene_old.get(&o.id).is_none() {
            return Err(Error::UnknownObject(o.id.clone()));
        }
    }
    let mut out = Vec::with_capacity(constraints.objects.len());
    for c in &constraints.objects {
        let new_pose = scene_new.get(&c.object_id).ok_or_else(|| Error::UnknownObject(c.object_id.clone()))?.pose;
        out.push(ReanchoredObject {
            object_id: c.object_id.clone(),
            poses: c.key_poses.iter().map(|k| new_pose * k.local).collect(),
            segment_indices: c.key_poses.iter().map(|k| k.segment_index).collect(),
        });
    }
    // Stable sort keeps scene order on ties.
    out.sort_by_key(|o| o.segment_indices.first().copied().unwrap_or(usize::MAX));
    Ok(out)
}

/// Where a guiding pose came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuideSource {
    Start,
    Key { object_id: String, segment_index: usize },
    Goal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidingPose {
    pub pose: UnitDualQuaternion,
    pub source: GuideSource,
}

/// The ordered pose list a new task instance's plan passes through.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidingPoses {
    pub poses: Vec<GuidingPose>,
}

impl GuidingPoses {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn dqs(&self) -> Vec<UnitDualQuaternion> {
        self.poses.iter().map(|g| g.pose).collect()
    }
}

fn same_pose(a: &UnitDualQuaternion, b: &UnitDualQuaternion) -> bool {
    dist_p(a, b) <= DUPLICATE_EPS && dist_phi(a, b) <= DUPLICATE_EPS
}

/// `{start, keys of object 1, ..., keys of object v, goal}` with consecutive
/// duplicates merged. A duplicate of the goal is replaced by the goal itself.
pub fn build_guiding_poses(
    start: &UnitDualQuaternion,
    reanchored: &[ReanchoredObject],
    goal: &UnitDualQuaternion,
) -> GuidingPoses {
    let mut poses = Vec::new();
    poses.push(GuidingPose { pose: *start, source: GuideSource::Start });
    let keys = reanchored.iter().flat_map(|o| {
        o.poses.iter().zip(&o.segment_indices).map(move |(p, &si)| GuidingPose {
            pose: *p,
            source: GuideSource::Key { object_id: o.object_id.clone(), segment_index: si },
        })
    });
    for g in keys {
        if !same_pose(&poses[poses.len() - 1].pose, &g.pose) {
            poses.push(g);
        }
    }
    let last = poses.len() - 1;
    let goal = GuidingPose { pose: *goal, source: GuideSource::Goal };
    if last > 0 && same_pose(&poses[last].pose, &goal.pose) {
        poses[last] = goal;
    } else if !same_pose(&poses[last].pose, &goal.pose) {
        poses.push(goal);
    }
    GuidingPoses { poses }
}

/// Largest per-step motion of the end-effector origin and rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepBounds {
    pub max_translation: f64,
    pub max_rotation: f64,
}

impl Default for StepBounds {
    fn default() -> Self {
        StepBounds { max_translation: 0.005, max_rotation: 0.02 }
    }
}

impl StepBounds {
    pub fn validate(&self) -> Result<()> {
        if self.max_translation > 0.0 && self.max_rotation > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidStep)
        }
    }
}

/// A dense plan and the indices of its guiding poses within it.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub trajectory: PoseTrajectory,
    pub guiding_indices: Vec<usize>,
}

/// Number of uniform ScLERP steps for the leg `a -> b` so that neither the
/// origin's helical path length nor the rotation per step exceeds `step`.
pub fn leg_steps(a: &UnitDualQuaternion, b: &UnitDualQuaternion, step: &StepBounds) -> usize {
    let rel = a.conjugate() * *b;
    let (path_len, angle) = match screw_params_from_dq(&rel) {
        Err(_) => return 1,
        Ok(s) => match s.pitch {
            Pitch::Infinite => (s.magnitude, 0.0),
            Pitch::Finite(h) => {
                let radius = s.axis_point().norm();
                let d = h * s.magnitude;
                (float::sqrt((radius * s.magnitude) * (radius * s.magnitude) + d * d), s.magnitude)
            }
        },
    };
    let n = float::ceil((path_len / step.max_translation).max(angle / step.max_rotation));
    if n.is_finite() && n >= 1.0 {
        n as usize
    } else {
        1
    }
}

/// ScLERP through consecutive guiding poses, each guiding pose emitted exactly.
pub fn plan_from_guiding_poses(gp: &GuidingPoses, step: &StepBounds) -> Result<Plan> {
    step.validate()?;
    if gp.len() < 2 {
        return Err(Error::TooShort { min: 2, got: gp.len() });
    }
    let mut poses = alloc::vec![gp.poses[0].pose];
    let mut guiding_indices = alloc::vec![0];
    for w in gp.poses.windows(2) {
        let (a, b) = (&w[0].pose, &w[1].pose);
        let n = leg_steps(a, b, step);
        let path = SclerpPath::new(a, b);
        for k in 1..n {
            poses.push(path.at(k as f64 / n as f64));
        }
        poses.push(*b);
        guiding_indices.push(poses.len() - 1);
    }
    Ok(Plan { trajectory: PoseTrajectory::new(poses)?, guiding_indices })
}

/// Plan for an articulated object: `n_steps + 1` poses moving `start` along
/// `params` by `magnitude` (negative reverses the motion).
pub fn articulated_plan(
    params: &ScrewParams,
    start: &UnitDualQuaternion,
    magnitude: f64,
    n_steps: usize,
) -> Result<PoseTrajectory> {
    params.validate()?;
    if n_steps == 0 {
        return Err(Error::ZeroSamples);
    }
    if !magnitude.is_finite() {
        return Err(Error::NonFinite { what: "magnitude" });
    }
    let poses = (0..=n_steps)
        .map(|k| {
            if k == 0 {
                *start
            } else {
                params.with_magnitude(magnitude * k as f64 / n_steps as f64).displacement() * *start
            }
        })
        .collect();
    PoseTrajectory::new(poses)
}

/// Goal pose `delta' x start` for the articulated motion.
pub fn articulated_goal(params: &ScrewParams, start: &UnitDualQuaternion, magnitude: f64) -> UnitDualQuaternion {
    params.with_magnitude(magnitude).displacement() * *start
}
