//! JSON file formats.
//!
//! Floats are written as the shortest decimal string that parses back to the
//! same `f64`, so `load(save(x)) == x` holds bit for bit. Non-finite values
//! are accepted on input (as `null`, `"NaN"`, `"inf"`) so that `validate` can
//! point at them; they are never written.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

use screwkit_core::kinematics::JointChain;
use screwkit_core::motion::{GuideSource, RegionOfInterest, SceneObject, TaskScene};
use screwkit_core::segmentation::{ResidualStats, ScrewSegment, Segmentation};
use screwkit_core::{
    Pitch, Pose, Quaternion, ScrewParams, Tolerance, UnitDualQuaternion, UnitQuaternion, Vec3, Verdict,
};

pub const VERSION: u32 = 1;

/// Quaternions further than this from unit norm are reported on load.
pub const UNIT_WARN: f64 = 1e-6;

fn lenient_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        N(f64),
        S(String),
        Null(()),
    }
    Ok(match Num::deserialize(d)? {
        Num::N(x) => x,
        Num::Null(()) => f64::NAN,
        Num::S(s) => match s.to_ascii_lowercase().as_str() {
            "nan" => f64::NAN,
            "inf" | "infinity" | "+inf" => f64::INFINITY,
            "-inf" | "-infinity" => f64::NEG_INFINITY,
            _ => return Err(serde::de::Error::custom(format!("expected a number, found {s:?}"))),
        },
    })
}

fn lenient_array<'de, D: Deserializer<'de>, const N: usize>(d: D) -> std::result::Result<[f64; N], D::Error> {
    #[derive(Deserialize)]
    struct W(#[serde(deserialize_with = "lenient_f64")] f64);
    let v: Vec<W> = Vec::deserialize(d)?;
    if v.len() != N {
        return Err(serde::de::Error::invalid_length(v.len(), &format!("{N} numbers").as_str()));
    }
    let mut out = [0.0; N];
    for (o, w) in out.iter_mut().zip(v) {
        *o = w.0;
    }
    Ok(out)
}

fn lenient_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    struct W(#[serde(deserialize_with = "lenient_f64")] f64);
    Ok(Vec::<W>::deserialize(d)?.into_iter().map(|w| w.0).collect())
}

fn lenient_opt_vec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    struct W(#[serde(deserialize_with = "lenient_vec")] Vec<f64>);
    Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
}

fn check_header(format: &str, version: u32, expected: &str) -> Result<()> {
    if format != expected {
        bail!("field `format`: expected {expected:?}, found {format:?}");
    }
    if version != VERSION {
        bail!("field `version`: unsupported version {version}");
    }
    Ok(())
}

/// One pose as `position` + `orientation` (w, x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    #[serde(deserialize_with = "lenient_array")]
    pub position: [f64; 3],
    #[serde(deserialize_with = "lenient_array")]
    pub orientation: [f64; 4],
}

/// A 4x4 homogeneous matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    #[serde(deserialize_with = "lenient_array")]
    pub matrix: [f64; 16],
}

impl PoseRecord {
    pub fn from_dq(d: &UnitDualQuaternion) -> Self {
        let p = d.to_pose();
        PoseRecord { position: p.position.to_array(), orientation: p.rotation.quaternion().to_wxyz() }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().chain(&self.orientation).all(|x| x.is_finite())
    }

    pub fn quat_norm(&self) -> f64 {
        self.orientation.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Converts, re-normalizing the orientation. Returns the norm defect too.
    pub fn to_dq(&self) -> Result<(UnitDualQuaternion, f64)> {
        if !self.is_finite() {
            bail!("non-finite value");
        }
        let n = self.quat_norm();
        if n < 1e-3 {
            bail!("orientation has norm {n}");
        }
        let q = UnitQuaternion::new_normalize(Quaternion::from_wxyz(self.orientation));
        Ok((UnitDualQuaternion::from_rotation_translation(q, Vec3::from_array(self.position)), (n - 1.0).abs()))
    }
}

/// Every pose in a file uses the same encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoseList {
    Quaternion(Vec<PoseRecord>),
    Matrix(Vec<MatrixRecord>),
}

impl PoseList {
    pub fn len(&self) -> usize {
        match self {
            PoseList::Quaternion(v) => v.len(),
            PoseList::Matrix(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn from_dqs(poses: &[UnitDualQuaternion]) -> Self {
        PoseList::Quaternion(poses.iter().map(PoseRecord::from_dq).collect())
    }

    /// Converted poses, plus one warning per re-normalized quaternion.
    pub fn to_dqs(&self) -> Result<(Vec<UnitDualQuaternion>, Vec<String>)> {
        let mut warnings = Vec::new();
        let poses = match self {
            PoseList::Quaternion(v) => v
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let (d, defect) = r.to_dq().with_context(|| format!("poses[{i}]"))?;
                    if defect > UNIT_WARN {
                        warnings.push(format!("poses[{i}]: orientation norm off by {defect:.3e}, re-normalized"));
                    }
                    Ok(d)
                })
                .collect::<Result<Vec<_>>>()?,
            PoseList::Matrix(v) => v
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    if m.matrix.iter().any(|x| !x.is_finite()) {
                        bail!("poses[{i}]: non-finite value");
                    }
                    Ok(Pose::from_matrix(&m.matrix).with_context(|| format!("poses[{i}]"))?.to_dq())
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok((poses, warnings))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PitchRecord {
    Finite(f64),
    Infinite(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrewRecord {
    pub axis: [f64; 3],
    /// Either `moment` or a `point` on the axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 3]>,
    pub pitch: PitchRecord,
    pub magnitude: f64,
}

impl From<&ScrewParams> for ScrewRecord {
    fn from(s: &ScrewParams) -> Self {
        ScrewRecord {
            axis: s.axis.to_array(),
            moment: Some(s.moment.to_array()),
            point: None,
            pitch: match s.pitch {
                Pitch::Finite(h) => PitchRecord::Finite(h),
                Pitch::Infinite => PitchRecord::Infinite(true),
            },
            magnitude: s.magnitude,
        }
    }
}

impl ScrewRecord {
    pub fn to_params(&self) -> Result<ScrewParams> {
        let pitch = match self.pitch {
            PitchRecord::Finite(h) => Pitch::Finite(h),
            PitchRecord::Infinite(true) => Pitch::Infinite,
            PitchRecord::Infinite(false) => bail!("field `pitch`: `infinite` must be true"),
        };
        let axis = Vec3::from_array(self.axis);
        let moment = match (self.moment, self.point) {
            (Some(m), None) => Vec3::from_array(m),
            // Normalize first so the moment matches the unit axis.
            (None, Some(p)) => match axis.try_normalize(1e-12) {
                Some(a) if !pitch.is_infinite() => Vec3::from_array(p).cross(a),
                _ => Vec3::ZERO,
            },
            (None, None) if pitch.is_infinite() => Vec3::ZERO,
            _ => bail!("screw needs exactly one of `moment` or `point`"),
        };
        let axis = if self.point.is_some() { axis.try_normalize(1e-12).unwrap_or(axis) } else { axis };
        let s = ScrewParams { axis, moment, pitch, magnitude: self.magnitude };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub joints: Vec<ScrewRecord>,
    pub home: PoseRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBlock {
    pub chain: ChainRecord,
    pub joint_values: Vec<Vec<f64>>,
}

impl JointBlock {
    pub fn forward(&self) -> Result<Vec<UnitDualQuaternion>> {
        let joints = self
            .chain
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| j.to_params().with_context(|| format!("joints.chain.joints[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let (home, _) = self.chain.home.to_dq().context("joints.chain.home")?;
        let chain = JointChain { joints, home: home.to_pose() };
        self.joint_values
            .iter()
            .enumerate()
            .map(|(i, q)| Ok(chain.forward(q).with_context(|| format!("joints.joint_values[{i}]"))?.to_dq()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub format: String,
    pub version: u32,
    /// May be empty when `joints` is present; poses then come from forward kinematics.
    #[serde(default = "empty_poses")]
    pub poses: PoseList,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "lenient_opt_vec")]
    pub timestamps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints: Option<JointBlock>,
}

fn empty_poses() -> PoseList {
    PoseList::Quaternion(Vec::new())
}

pub const TRAJECTORY_FORMAT: &str = "screwkit-trajectory";

impl TrajectoryFile {
    pub fn new(poses: &[UnitDualQuaternion], timestamps: Option<Vec<f64>>) -> Self {
        TrajectoryFile {
            format: TRAJECTORY_FORMAT.into(),
            version: VERSION,
            poses: PoseList::from_dqs(poses),
            timestamps,
            joints: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        check_header(&self.format, self.version, TRAJECTORY_FORMAT)
    }

    /// Poses, from the explicit list or else from the joint block.
    pub fn dqs(&self) -> Result<(Vec<UnitDualQuaternion>, Vec<String>)> {
        match &self.joints {
            Some(j) if self.poses.is_empty() => Ok((j.forward()?, Vec::new())),
            _ => self.poses.to_dqs(),
        }
    }

    pub fn trajectory(&self) -> Result<(screwkit_core::PoseTrajectory, Vec<String>)> {
        self.check()?;
        let (poses, warnings) = self.dqs()?;
        let t = screwkit_core::PoseTrajectory::with_timestamps(poses, self.timestamps.clone())?;
        Ok((t, warnings))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoiRecord {
    Sphere(f64),
    Cuboid([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: String,
    pub pose: PoseRecord,
    pub roi: RoiRecord,
}

pub const SCENE_FORMAT: &str = "screwkit-scene";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub format: String,
    pub version: u32,
    pub objects: Vec<ObjectRecord>,
}

impl SceneFile {
    pub fn from_scene(scene: &TaskScene) -> Self {
        SceneFile {
            format: SCENE_FORMAT.into(),
            version: VERSION,
            objects: scene
                .objects()
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id.clone(),
                    pose: PoseRecord::from_dq(&o.pose),
                    roi: match o.roi {
                        RegionOfInterest::Sphere { radius } => RoiRecord::Sphere(radius),
                        RegionOfInterest::Cuboid { half_extents } => RoiRecord::Cuboid(half_extents.to_array()),
                    },
                })
                .collect(),
        }
    }

    pub fn scene(&self) -> Result<TaskScene> {
        check_header(&self.format, self.version, SCENE_FORMAT)?;
        let objects = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let roi = match o.roi {
                    RoiRecord::Sphere(r) => RegionOfInterest::sphere(r),
                    RoiRecord::Cuboid(h) => RegionOfInterest::cuboid(Vec3::from_array(h)),
                }
                .with_context(|| format!("objects[{i}].roi"))?;
                let (pose, _) = o.pose.to_dq().with_context(|| format!("objects[{i}].pose"))?;
                Ok(SceneObject { id: o.id.clone(), pose, roi })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TaskScene::new(objects)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceRecord {
    pub eps_p: f64,
    pub eps_phi: f64,
}

impl From<&Tolerance> for ToleranceRecord {
    fn from(t: &Tolerance) -> Self {
        ToleranceRecord { eps_p: t.eps_p(), eps_phi: t.eps_phi() }
    }
}

impl ToleranceRecord {
    pub fn tolerance(&self) -> Result<Tolerance> {
        Ok(Tolerance::new(self.eps_p, self.eps_phi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictRecord {
    PureTranslation,
    GeneralScrew,
    NotConstantScrew,
    NoMotion,
}

impl From<Verdict> for VerdictRecord {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::PureTranslation => VerdictRecord::PureTranslation,
            Verdict::GeneralScrew => VerdictRecord::GeneralScrew,
            Verdict::NotConstantScrew => VerdictRecord::NotConstantScrew,
            Verdict::NoMotion => VerdictRecord::NoMotion,
        }
    }
}

impl From<VerdictRecord> for Verdict {
    fn from(v: VerdictRecord) -> Self {
        match v {
            VerdictRecord::PureTranslation => Verdict::PureTranslation,
            VerdictRecord::GeneralScrew => Verdict::GeneralScrew,
            VerdictRecord::NotConstantScrew => Verdict::NotConstantScrew,
            VerdictRecord::NoMotion => Verdict::NoMotion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub max_p: f64,
    pub max_phi: f64,
    pub mean_p: f64,
    pub mean_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub start_index: usize,
    pub end_index: usize,
    pub verdict: VerdictRecord,
    pub start_pose: PoseRecord,
    pub end_pose: PoseRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screw: Option<ScrewRecord>,
    pub residuals: ResidualRecord,
}

pub const SEGMENTATION_FORMAT: &str = "screwkit-segmentation";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationFile {
    pub format: String,
    pub version: u32,
    pub source_len: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceRecord>,
    pub segments: Vec<SegmentRecord>,
}

impl SegmentationFile {
    pub fn from_segmentation(seg: &Segmentation, tol: Option<&Tolerance>) -> Self {
        SegmentationFile {
            format: SEGMENTATION_FORMAT.into(),
            version: VERSION,
            source_len: seg.source_len,
            tolerance: tol.map(ToleranceRecord::from),
            segments: seg
                .segments
                .iter()
                .map(|s| SegmentRecord {
                    start_index: s.start_index,
                    end_index: s.end_index,
                    verdict: s.verdict.into(),
                    start_pose: PoseRecord::from_dq(&s.start_pose),
                    end_pose: PoseRecord::from_dq(&s.end_pose),
                    screw: s.params.as_ref().map(ScrewRecord::from),
                    residuals: ResidualRecord {
                        max_p: s.residual_stats.max_p,
                        max_phi: s.residual_stats.max_phi,
                        mean_p: s.residual_stats.mean_p,
                        mean_phi: s.residual_stats.mean_phi,
                    },
                })
                .collect(),
        }
    }

    pub fn segmentation(&self) -> Result<Segmentation> {
        check_header(&self.format, self.version, SEGMENTATION_FORMAT)?;
        let segments = self
            .segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let ctx = || format!("segments[{i}]");
                Ok(ScrewSegment {
                    start_index: s.start_index,
                    end_index: s.end_index,
                    start_pose: s.start_pose.to_dq().with_context(ctx)?.0,
                    end_pose: s.end_pose.to_dq().with_context(ctx)?.0,
                    verdict: s.verdict.into(),
                    params: s.screw.as_ref().map(|r| r.to_params()).transpose().with_context(ctx)?,
                    residual_stats: ResidualStats {
                        max_p: s.residuals.max_p,
                        max_phi: s.residuals.max_phi,
                        mean_p: s.residuals.mean_p,
                        mean_phi: s.residuals.mean_phi,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Segmentation { segments, source_len: self.source_len })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuideRecord {
    Start,
    Key { object_id: String, segment_index: usize },
    Goal,
}

impl From<&GuideSource> for GuideRecord {
    fn from(g: &GuideSource) -> Self {
        match g {
            GuideSource::Start => GuideRecord::Start,
            GuideSource::Key { object_id, segment_index } => {
                GuideRecord::Key { object_id: object_id.clone(), segment_index: *segment_index }
            }
            GuideSource::Goal => GuideRecord::Goal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidingRecord {
    /// Index of the guiding pose in `poses`.
    pub index: usize,
    pub source: GuideRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the source file bytes.
    pub source_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screw: Option<ScrewRecord>,
    pub guiding: Vec<GuidingRecord>,
}

pub const PLAN_FORMAT: &str = "screwkit-plan";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub format: String,
    pub version: u32,
    pub poses: PoseList,
    pub provenance: Provenance,
}

impl PlanFile {
    pub fn new(poses: &[UnitDualQuaternion], provenance: Provenance) -> Self {
        PlanFile { format: PLAN_FORMAT.into(), version: VERSION, poses: PoseList::from_dqs(poses), provenance }
    }

    pub fn dqs(&self) -> Result<Vec<UnitDualQuaternion>> {
        check_header(&self.format, self.version, PLAN_FORMAT)?;
        Ok(self.poses.to_dqs()?.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegRecord {
    pub screw: ScrewRecord,
    pub samples: usize,
}

/// Input of `synth`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthFile {
    pub legs: Vec<LegRecord>,
    pub start: PoseRecord,
    pub sigma_p: f64,
    pub sigma_phi: f64,
    pub seed: u64,
}

impl SynthFile {
    pub fn spec(&self) -> Result<screwkit_core::synth::SynthSpec> {
        let legs = self
            .legs
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(screwkit_core::synth::SynthLeg {
                    screw: l.screw.to_params().with_context(|| format!("legs[{i}].screw"))?,
                    samples: l.samples,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = screwkit_core::synth::SynthSpec {
            legs,
            start: self.start.to_dq().context("start")?.0,
            sigma_p: self.sigma_p,
            sigma_phi: self.sigma_phi,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Standalone screw, accepted by `plan-articulated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScrewFile {
    pub format: String,
    pub version: u32,
    pub screw: ScrewRecord,
}

pub const SCREW_FORMAT: &str = "screwkit-screw";

pub fn to_json<T: Serialize>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(x).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn save<T: Serialize>(path: &Path, x: &T) -> Result<()> {
    fs::write(path, to_json(x)).with_context(|| format!("writing {}", path.display()))
}

/// Header-only view used to tell file kinds apart.
#[derive(Deserialize)]
pub struct Header {
    pub format: String,
}
