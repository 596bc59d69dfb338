use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use screwkit_core::motion::{self, StepBounds};
use screwkit_core::{
    get_screw_parameters, get_screw_segments, Pitch, ScrewParams, Tolerance, UnitDualQuaternion,
    Vec3, Verdict,
};

use crate::format::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_SCREW: i32 = 2;
pub const EXIT_NO_MOTION: i32 = 3;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).with_context(|| format!("parsing {}", path.display()))
}

fn load_trajectory(path: &Path) -> Result<(screwkit_core::PoseTrajectory, Vec<u8>)> {
    let bytes = read(path)?;
    let file: TrajectoryFile = parse(path, &bytes)?;
    let (traj, warnings) = file.trajectory().with_context(|| format!("loading {}", path.display()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok((traj, bytes))
}

/// Writes `text` to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn tolerance(eps_p: f64, eps_phi: f64) -> Result<Tolerance> {
    Tolerance::new(eps_p, eps_phi).map_err(|e| anyhow!("tolerance: {e}"))
}

fn fmt_vec(v: Vec3) -> String {
    format!("[{}, {}, {}]", v.x, v.y, v.z)
}

pub fn screw_report(s: &ScrewParams) -> String {
    let mut r = String::new();
    writeln!(r, "axis (omega): {}", fmt_vec(s.axis)).unwrap();
    writeln!(r, "moment (m):   {}", fmt_vec(s.moment)).unwrap();
    match s.pitch {
        Pitch::Finite(h) => {
            writeln!(r, "theta:        {} rad ({} deg)", s.magnitude, s.magnitude.to_degrees()).unwrap();
            writeln!(r, "pitch (h):    {h} m/rad").unwrap();
            writeln!(r, "translation:  {} m", s.translation()).unwrap();
        }
        Pitch::Infinite => {
            writeln!(r, "distance:     {} m", s.magnitude).unwrap();
            writeln!(r, "pitch (h):    infinite").unwrap();
        }
    }
    r
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::PureTranslation => "PureTranslation",
        Verdict::GeneralScrew => "GeneralScrew",
        Verdict::NotConstantScrew => "NotConstantScrew",
        Verdict::NoMotion => "NoMotion",
    }
}

#[derive(serde::Serialize)]
struct ExtractReport {
    verdict: VerdictRecord,
    tolerance: ToleranceRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    screw: Option<ScrewRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<ResidualRecord>,
}

pub fn extract(path: &Path, tol: &Tolerance, json: bool) -> Result<i32> {
    let (traj, _) = load_trajectory(path)?;
    let fit = get_screw_parameters(&traj, tol);
    if json {
        let stats = (!fit.residuals.is_empty()).then(|| {
            let s = screwkit_core::segmentation::ResidualStats::from_residuals(&fit.residuals);
            ResidualRecord { max_p: s.max_p, max_phi: s.max_phi, mean_p: s.mean_p, mean_phi: s.mean_phi }
        });
        let report = ExtractReport {
            verdict: fit.verdict.into(),
            tolerance: tol.into(),
            screw: fit.params.as_ref().map(ScrewRecord::from),
            theta_deg: fit.params.as_ref().filter(|s| !s.pitch.is_infinite()).map(|s| s.magnitude.to_degrees()),
            residuals: stats,
        };
        emit(None, &to_json(&report))?;
    } else {
        let mut text = format!("verdict:      {}\n", verdict_name(fit.verdict));
        if let Some(s) = &fit.params {
            text.push_str(&screw_report(s));
        }
        emit(None, &text)?;
    }
    Ok(match fit.verdict {
        Verdict::PureTranslation | Verdict::GeneralScrew => EXIT_OK,
        Verdict::NotConstantScrew => EXIT_NOT_SCREW,
        Verdict::NoMotion => EXIT_NO_MOTION,
    })
}

pub fn segment(path: &Path, tol: &Tolerance, out: Option<&Path>) -> Result<i32> {
    let (traj, _) = load_trajectory(path)?;
    let seg = get_screw_segments(&traj, tol);
    let file = SegmentationFile::from_segmentation(&seg, Some(tol));
    emit(out, &to_json(&file))?;
    eprintln!("{} segments, breakpoints {:?}", seg.len(), seg.breakpoints());
    Ok(EXIT_OK)
}

/// Parses a magnitude: bare numbers are radians or meters, a `deg` suffix means degrees.
pub fn parse_magnitude(text: &str) -> Result<(f64, bool)> {
    let t = text.trim();
    let (num, deg) = match t.strip_suffix("deg") {
        Some(n) => (n.trim(), true),
        None => (t, false),
    };
    let v: f64 = num.parse().map_err(|_| anyhow!("invalid magnitude {text:?}"))?;
    if !v.is_finite() {
        bail!("invalid magnitude {text:?}");
    }
    Ok(if deg { (v.to_radians(), true) } else { (v, false) })
}

/// A pose given either as a JSON pose file or as `x,y,z,qw,qx,qy,qz`.
pub fn parse_pose(text: &str) -> Result<UnitDualQuaternion> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() == 7 {
        let v = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| anyhow!("invalid pose component {p:?}")))
            .collect::<Result<Vec<_>>>()?;
        let rec = PoseRecord { position: [v[0], v[1], v[2]], orientation: [v[3], v[4], v[5], v[6]] };
        return Ok(rec.to_dq()?.0);
    }
    let rec: PoseRecord = load(Path::new(text))?;
    Ok(rec.to_dq()?.0)
}

pub struct ArticulatedArgs {
    pub input: PathBuf,
    pub start: Option<String>,
    pub magnitude: String,
    pub steps: usize,
    pub tol: Tolerance,
    pub out: Option<PathBuf>,
}

pub fn plan_articulated(a: &ArticulatedArgs) -> Result<i32> {
    let bytes = read(&a.input)?;
    let header: Header = parse(&a.input, &bytes)?;
    let (screw, demo_start, tol) = match header.format.as_str() {
        SCREW_FORMAT => {
            let f: ScrewFile = parse(&a.input, &bytes)?;
            (f.screw.to_params().context("screw")?, None, None)
        }
        TRAJECTORY_FORMAT => {
            let (traj, _) = load_trajectory(&a.input)?;
            let fit = get_screw_parameters(&traj, &a.tol);
            match fit.params {
                Some(s) => (s, Some(*traj.first()), Some(a.tol)),
                None => bail!("demonstration is not a constant screw motion ({})", verdict_name(fit.verdict)),
            }
        }
        f => bail!("{}: expected a screw or trajectory file, found format {f:?}", a.input.display()),
    };
    let (magnitude, deg) = parse_magnitude(&a.magnitude)?;
    if deg && screw.pitch.is_infinite() {
        bail!("magnitude in degrees given for a prismatic screw; use meters");
    }
    let start = match (&a.start, demo_start) {
        (Some(s), _) => parse_pose(s)?,
        (None, Some(d)) => d,
        (None, None) => bail!("--start is required with a screw file"),
    };
    let poses = if magnitude == 0.0 {
        vec![start]
    } else {
        motion::articulated_plan(&screw, &start, magnitude, a.steps)?.into_poses()
    };
    let provenance = Provenance {
        source_sha256: sha256_hex(&bytes),
        tolerance: tol.as_ref().map(ToleranceRecord::from),
        screw: Some(ScrewRecord::from(&screw.with_magnitude(magnitude))),
        guiding: guiding_ends(poses.len()),
    };
    emit(a.out.as_deref(), &to_json(&PlanFile::new(&poses, provenance)))?;
    Ok(EXIT_OK)
}

fn guiding_ends(n: usize) -> Vec<GuidingRecord> {
    let mut g = vec![GuidingRecord { index: 0, source: GuideRecord::Start }];
    if n > 1 {
        g.push(GuidingRecord { index: n - 1, source: GuideRecord::Goal });
    }
    g
}

pub struct TaskArgs {
    pub demo: PathBuf,
    pub old_scene: PathBuf,
    pub new_scene: PathBuf,
    pub start: Option<String>,
    pub goal: Option<String>,
    pub tol: Tolerance,
    pub step: StepBounds,
    pub out: Option<PathBuf>,
}

fn id_mismatch(old: &screwkit_core::TaskScene, new: &screwkit_core::TaskScene) -> Option<String> {
    let missing: Vec<&str> = old.objects().iter().filter(|o| new.get(&o.id).is_none()).map(|o| o.id.as_str()).collect();
    let extra: Vec<&str> = new.objects().iter().filter(|o| old.get(&o.id).is_none()).map(|o| o.id.as_str()).collect();
    if missing.is_empty() && extra.is_empty() {
        return None;
    }
    let mut msg = String::from("scene object ids do not match");
    if !missing.is_empty() {
        write!(msg, "; missing from new scene: {}", missing.join(", ")).unwrap();
    }
    if !extra.is_empty() {
        write!(msg, "; not in old scene: {}", extra.join(", ")).unwrap();
    }
    Some(msg)
}

pub fn plan_task(a: &TaskArgs) -> Result<i32> {
    let (traj, bytes) = load_trajectory(&a.demo)?;
    let old: SceneFile = load(&a.old_scene)?;
    let new: SceneFile = load(&a.new_scene)?;
    let old = old.scene().with_context(|| a.old_scene.display().to_string())?;
    let new = new.scene().with_context(|| a.new_scene.display().to_string())?;
    if let Some(msg) = id_mismatch(&old, &new) {
        bail!(msg);
    }
    let seg = get_screw_segments(&traj, &a.tol);
    let constraints = motion::extract_key_segments(&seg, &old);
    let reanchored = motion::reanchor(&constraints, &old, &new)?;
    let start = a.start.as_deref().map(parse_pose).transpose()?.unwrap_or(*traj.first());
    let goal = a.goal.as_deref().map(parse_pose).transpose()?.unwrap_or(*traj.last());
    let gp = motion::build_guiding_poses(&start, &reanchored, &goal);
    let plan = motion::plan_from_guiding_poses(&gp, &a.step)?;
    let provenance = Provenance {
        source_sha256: sha256_hex(&bytes),
        tolerance: Some((&a.tol).into()),
        screw: None,
        guiding: plan
            .guiding_indices
            .iter()
            .zip(&gp.poses)
            .map(|(&index, g)| GuidingRecord { index, source: (&g.source).into() })
            .collect(),
    };
    emit(a.out.as_deref(), &to_json(&PlanFile::new(plan.trajectory.poses(), provenance)))?;
    eprintln!("{} segments, {} guiding poses, {} plan poses", seg.len(), gp.len(), plan.trajectory.len());
    Ok(EXIT_OK)
}

/// Path of the ground-truth file written next to `out`.
pub fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = stem.strip_suffix(".traj").unwrap_or(&stem).to_string();
    out.with_file_name(format!("{stem}.truth.json"))
}

pub fn synth(spec_path: &Path, out: &Path, truth: Option<&Path>, seed_override: Option<u64>) -> Result<i32> {
    let mut file: SynthFile = load(spec_path)?;
    if let Some(s) = seed_override {
        file.seed = s;
    }
    let spec = file.spec().with_context(|| spec_path.display().to_string())?;
    let output = screwkit_core::synth::gen_trajectory(&spec)?;
    let traj = TrajectoryFile::new(output.trajectory.poses(), None);
    let truth_file = SegmentationFile::from_segmentation(&output.ground_truth, None);
    save(out, &traj)?;
    let truth = truth.map(Path::to_path_buf).unwrap_or_else(|| truth_path(out));
    save(&truth, &truth_file)?;
    Ok(EXIT_OK)
}

/// Every problem found in a trajectory file, each naming the offending index.
pub fn validate_file(file: &TrajectoryFile) -> Vec<String> {
    let mut problems = Vec::new();
    if let Err(e) = file.check() {
        problems.push(format!("{e}"));
    }
    match &file.poses {
        PoseList::Quaternion(v) => {
            for (i, r) in v.iter().enumerate() {
                if !r.is_finite() {
                    problems.push(format!("poses[{i}]: non-finite value"));
                } else if (r.quat_norm() - 1.0).abs() > UNIT_WARN {
                    problems.push(format!("poses[{i}]: orientation norm {} is not unit", r.quat_norm()));
                }
            }
        }
        PoseList::Matrix(v) => {
            for (i, m) in v.iter().enumerate() {
                if m.matrix.iter().any(|x| !x.is_finite()) {
                    problems.push(format!("poses[{i}]: non-finite value"));
                } else if let Err(e) = screwkit_core::Pose::from_matrix(&m.matrix) {
                    problems.push(format!("poses[{i}]: {e}"));
                }
            }
        }
    }
    let n = match (&file.poses, &file.joints) {
        (p, Some(j)) if p.is_empty() => {
            if let Err(e) = j.forward() {
                problems.push(format!("{e:#}"));
            }
            j.joint_values.len()
        }
        (p, _) => p.len(),
    };
    if n < 2 {
        problems.push(format!("need at least 2 poses, found {n}"));
    }
    if let Some(ts) = &file.timestamps {
        if ts.len() != n {
            problems.push(format!("timestamps: {} values for {n} poses", ts.len()));
        }
        for (i, t) in ts.iter().enumerate() {
            if !t.is_finite() {
                problems.push(format!("timestamps[{i}]: non-finite value"));
            } else if i > 0 && ts[i - 1].is_finite() && *t <= ts[i - 1] {
                problems.push(format!("timestamps[{i}]: not strictly increasing"));
            }
        }
    }
    problems
}

pub fn validate(path: &Path) -> Result<i32> {
    let file: TrajectoryFile = load(path)?;
    let problems = validate_file(&file);
    if problems.is_empty() {
        println!("ok: {} poses", file.poses.len().max(file.joints.as_ref().map_or(0, |j| j.joint_values.len())));
        Ok(EXIT_OK)
    } else {
        bail!("{} problem(s):\n  {}", problems.len(), problems.join("\n  "))
    }
}
