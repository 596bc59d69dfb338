use std::path::Path;
use std::process::{Command, Output};

use screwkit::format::*;
use screwkit_core::motion::{RegionOfInterest, SceneObject, TaskScene};
use screwkit_core::*;

fn screwkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_screwkit")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn start() -> UnitDualQuaternion {
    UnitDualQuaternion::from_rotation_translation(UnitQuaternion::from_axis_angle(Vec3::X, 2.0), Vec3::new(0.8, 0.2, 0.3))
}

fn revolute() -> ScrewParams {
    ScrewParams::revolute(Vec3::Z, Vec3::new(0.5, 0.2, 0.0), 40f64.to_radians())
}

fn spec(legs: &[(ScrewParams, usize)], sigma: (f64, f64)) -> SynthFile {
    SynthFile {
        legs: legs.iter().map(|(s, n)| LegRecord { screw: ScrewRecord::from(s), samples: *n }).collect(),
        start: PoseRecord::from_dq(&start()),
        sigma_p: sigma.0,
        sigma_phi: sigma.1,
        seed: 3,
    }
}

fn two_legs() -> Vec<(ScrewParams, usize)> {
    vec![
        (ScrewParams::revolute(Vec3::Z, Vec3::new(0.5, 0.2, 0.0), 60f64.to_radians()), 50),
        (ScrewParams::prismatic(Vec3::new(0.5, 0.866_025_403_784_438_6, 0.0), 0.2), 50),
    ]
}

fn write_demo(dir: &Path, name: &str, legs: &[(ScrewParams, usize)], sigma: (f64, f64)) {
    let spec_name = format!("{name}.spec.json");
    save(&dir.join(&spec_name), &spec(legs, sigma)).unwrap();
    let o = screwkit(dir, &["synth", &spec_name, "-o", &format!("{name}.traj.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn extract_reports_revolute_screw() {
    let d = tempfile::tempdir().unwrap();
    write_demo(d.path(), "door", &[(revolute(), 30)], (0.002, 0.01));
    let o = screwkit(d.path(), &["extract", "door.traj.json", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "general_screw");
    assert!(v["screw"]["pitch"]["finite"].as_f64().unwrap().abs() < 0.03);
    assert_eq!(v["tolerance"]["eps_p"], 0.01);
    assert_eq!(v["tolerance"]["eps_phi"], 0.1);

    let o = screwkit(d.path(), &["extract", "door.traj.json"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("GeneralScrew") && text.contains("deg"));
}

#[test]
fn extract_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write_demo(d.path(), "two", &two_legs(), (0.0, 0.0));
    assert_eq!(code(&screwkit(d.path(), &["extract", "two.traj.json"])), 2);

    let still = TrajectoryFile::new(&[start(); 5], None);
    save(&d.path().join("still.json"), &still).unwrap();
    assert_eq!(code(&screwkit(d.path(), &["extract", "still.json"])), 3);

    let empty = TrajectoryFile::new(&[], None);
    save(&d.path().join("empty.json"), &empty).unwrap();
    assert_eq!(code(&screwkit(d.path(), &["extract", "empty.json"])), 1);

    std::fs::write(d.path().join("bad.json"), "{\"format\": \"screwkit-trajectory\",\n \"version\": 1,\n \"poses\": 7}").unwrap();
    let o = screwkit(d.path(), &["extract", "bad.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn segment_counts_legs() {
    let d = tempfile::tempdir().unwrap();
    write_demo(d.path(), "two", &two_legs(), (0.002, 0.01));
    write_demo(d.path(), "one", &[(revolute(), 30)], (0.002, 0.01));
    for (name, u) in [("two", 2), ("one", 1)] {
        let out = format!("{name}.segments.json");
        let o = screwkit(d.path(), &["segment", &format!("{name}.traj.json"), "-o", &out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let f: SegmentationFile = load(&d.path().join(&out)).unwrap();
        assert_eq!(f.segments.len(), u);
        assert_eq!(f.tolerance.unwrap().eps_phi, 0.15);
    }
    let o = screwkit(d.path(), &["segment", "two.traj.json", "-o", "no/such/dir/out.json"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn synth_is_reproducible_and_seed_overridable() {
    let d = tempfile::tempdir().unwrap();
    save(&d.path().join("s.json"), &spec(&two_legs(), (0.002, 0.01))).unwrap();
    screwkit(d.path(), &["synth", "s.json", "-o", "a.json"]);
    screwkit(d.path(), &["synth", "s.json", "-o", "b.json"]);
    let read = |n: &str| std::fs::read(d.path().join(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_eq!(read("a.truth.json"), read("b.truth.json"));
    let o = Command::new(env!("CARGO_BIN_EXE_screwkit"))
        .args(["synth", "s.json", "-o", "c.json"])
        .env("SCREWKIT_SEED", "99")
        .current_dir(d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_ne!(read("a.json"), read("c.json"));
    let truth: SegmentationFile = load(&d.path().join("a.truth.json")).unwrap();
    assert_eq!(truth.segmentation().unwrap().breakpoints(), vec![50]);
}

#[test]
fn validate_flags_bad_values() {
    let d = tempfile::tempdir().unwrap();
    let mut f = TrajectoryFile::new(&[start(), UnitDualQuaternion::IDENTITY, start()], Some(vec![0.0, 0.2, 0.1]));
    save(&d.path().join("t.json"), &f).unwrap();
    let o = screwkit(d.path(), &["validate", "t.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("timestamps[2]"), "{}", stderr(&o));

    f.timestamps = None;
    let mut text = to_json(&f);
    let first = text.find("\"position\": [").unwrap() + "\"position\": [".len();
    let comma = first + text[first..].find(',').unwrap();
    text.replace_range(first..comma, "null");
    std::fs::write(d.path().join("nan.json"), &text).unwrap();
    let o = screwkit(d.path(), &["validate", "nan.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("poses[0]: non-finite"), "{}", stderr(&o));

    if let PoseList::Quaternion(v) = &mut f.poses {
        v[1].orientation = [1.1, 0.0, 0.0, 0.0];
    }
    save(&d.path().join("denorm.json"), &f).unwrap();
    let o = screwkit(d.path(), &["validate", "denorm.json"]);
    assert!(stderr(&o).contains("poses[1]"));
    let o = screwkit(d.path(), &["extract", "denorm.json"]);
    assert!(stderr(&o).contains("re-normalized"));
}

#[test]
fn synth_segment_reconstruct_validates() {
    let d = tempfile::tempdir().unwrap();
    write_demo(d.path(), "two", &two_legs(), (0.002, 0.01));
    screwkit(d.path(), &["segment", "two.traj.json", "-o", "two.seg.json"]);
    let seg: SegmentationFile = load(&d.path().join("two.seg.json")).unwrap();
    let rebuilt = reconstruct(&seg.segmentation().unwrap(), 20).unwrap();
    save(&d.path().join("re.json"), &TrajectoryFile::new(rebuilt.poses(), None)).unwrap();
    let o = screwkit(d.path(), &["validate", "re.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn plan(d: &Path, name: &str) -> PlanFile {
    load(&d.join(name)).unwrap()
}

#[test]
fn articulated_plans() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write_demo(p, "door", &[(revolute(), 30)], (0.0, 0.0));
    let demo: TrajectoryFile = load(&p.join("door.traj.json")).unwrap();
    let poses = demo.dqs().unwrap().0;
    let open = poses.last().unwrap().to_pose();
    let q = open.rotation.quaternion().to_wxyz();
    let open_arg = format!("{},{},{},{},{},{},{}", open.position.x, open.position.y, open.position.z, q[0], q[1], q[2], q[3]);

    let o = screwkit(p, &["plan-articulated", "door.traj.json", "--start", &open_arg, "--magnitude", "-40deg", "-o", "close.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let close = plan(p, "close.json").dqs().unwrap();
    assert!(close.last().unwrap().max_abs_diff(&poses[0]) < 1e-6);
    assert!(close.first().unwrap().max_abs_diff(poses.last().unwrap()) < 1e-12);

    screwkit(p, &["plan-articulated", "door.traj.json", "--magnitude", "0", "-o", "zero.json"]);
    assert_eq!(plan(p, "zero.json").poses.len(), 1);

    let slide = ScrewFile {
        format: SCREW_FORMAT.into(),
        version: VERSION,
        screw: ScrewRecord::from(&ScrewParams::prismatic(Vec3::Y, 1.0)),
    };
    save(&p.join("slide.json"), &slide).unwrap();
    let o = screwkit(p, &["plan-articulated", "slide.json", "--start", "0,0,0,1,0,0,0", "--magnitude", "0.30", "--steps", "10", "-o", "drawer.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let drawer = plan(p, "drawer.json");
    let end = drawer.dqs().unwrap()[10].translation();
    assert!((end - Vec3::new(0.0, 0.3, 0.0)).max_abs() < 1e-12);
    assert_eq!(drawer.provenance.guiding.last().unwrap().index, 10);

    assert_eq!(code(&screwkit(p, &["plan-articulated", "slide.json", "--start", "0,0,0,1,0,0,0", "--magnitude", "30deg"])), 1);
    assert_eq!(code(&screwkit(p, &["plan-articulated", "slide.json", "--magnitude", "0.3"])), 1);
}

fn scene(bowl: Vec3) -> SceneFile {
    SceneFile::from_scene(
        &TaskScene::new(vec![
            SceneObject { id: "table".into(), pose: UnitDualQuaternion::IDENTITY, roi: RegionOfInterest::sphere(10.0).unwrap() },
            SceneObject {
                id: "bowl".into(),
                pose: UnitDualQuaternion::from_translation(bowl),
                roi: RegionOfInterest::sphere(screwkit_core::motion::CONTAINER_ROI_RADIUS).unwrap(),
            },
        ])
        .unwrap(),
    )
}

#[test]
fn task_plans() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    write_demo(p, "pour", &two_legs(), (0.002, 0.01));
    let demo: TrajectoryFile = load(&p.join("pour.traj.json")).unwrap();
    let poses = demo.dqs().unwrap().0;
    let bowl = poses[50].translation() + Vec3::new(0.0, 0.0, 0.05);
    save(&p.join("old.json"), &scene(bowl)).unwrap();
    let moved = bowl + Vec3::new(0.1, 0.0, 0.0);
    let mut new = scene(moved);
    new.objects[0].pose = PoseRecord::from_dq(&UnitDualQuaternion::from_translation(Vec3::new(0.1, 0.0, 0.0)));
    save(&p.join("new.json"), &new).unwrap();

    let o = screwkit(p, &["plan-task", "pour.traj.json", "old.json", "old.json", "-o", "same.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let same = plan(p, "same.json");
    let same_poses = same.dqs().unwrap();
    assert!(same_poses.last().unwrap().max_abs_diff(poses.last().unwrap()) < 1e-12);
    let key_indices: Vec<usize> = same
        .provenance
        .guiding
        .iter()
        .filter_map(|g| match &g.source {
            GuideRecord::Key { object_id, segment_index } if object_id == "bowl" => Some(*segment_index),
            _ => None,
        })
        .collect();
    assert_eq!(key_indices, vec![0]);

    let shift = UnitDualQuaternion::from_translation(Vec3::new(0.1, 0.0, 0.0));
    let o = screwkit(p, &["plan-task", "pour.traj.json", "old.json", "new.json", "-o", "moved.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let moved_plan = plan(p, "moved.json");
    let mp = moved_plan.dqs().unwrap();
    for (a, b) in same.provenance.guiding.iter().zip(&moved_plan.provenance.guiding) {
        if matches!(a.source, GuideRecord::Key { .. }) {
            assert!((shift * same_poses[a.index]).max_abs_diff(&mp[b.index]) < 1e-9);
        }
    }

    let mut missing = scene(moved);
    missing.objects[1].id = "cup".into();
    save(&p.join("missing.json"), &missing).unwrap();
    let o = screwkit(p, &["plan-task", "pour.traj.json", "old.json", "missing.json"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bowl") && stderr(&o).contains("cup"), "{}", stderr(&o));
}

#[test]
fn matrix_and_joint_encodings_load() {
    let poses = [start(), revolute().displacement() * start()];
    let mut f = TrajectoryFile::new(&poses, None);
    f.poses = PoseList::Matrix(poses.iter().map(|p| MatrixRecord { matrix: p.to_pose().to_matrix() }).collect());
    let (loaded, _) = f.trajectory().unwrap();
    for (a, b) in loaded.poses().iter().zip(&poses) {
        assert!(a.max_abs_diff(b) < 1e-12);
    }

    let j = TrajectoryFile {
        format: TRAJECTORY_FORMAT.into(),
        version: VERSION,
        poses: PoseList::Quaternion(Vec::new()),
        timestamps: Some(vec![0.0, 1.0]),
        joints: Some(JointBlock {
            chain: ChainRecord {
                joints: vec![ScrewRecord::from(&ScrewParams::revolute(Vec3::Z, Vec3::ZERO, 0.0))],
                home: PoseRecord::from_dq(&UnitDualQuaternion::from_translation(Vec3::new(0.5, 0.0, 0.0))),
            },
            joint_values: vec![vec![0.0], vec![std::f64::consts::FRAC_PI_2]],
        }),
    };
    let (loaded, _) = from_json::<TrajectoryFile>(&to_json(&j)).unwrap().trajectory().unwrap();
    assert!((loaded.last().translation() - Vec3::new(0.0, 0.5, 0.0)).max_abs() < 1e-12);
}

#[test]
fn domain_round_trips() {
    let traj = vec![start(), revolute().displacement() * start()];
    let back = TrajectoryFile::new(&traj, None).trajectory().unwrap().0;
    for (a, b) in traj.iter().zip(back.poses()) {
        assert!(a.max_abs_diff(b) < 1e-15);
    }
    let s = scene(Vec3::new(1.0, 2.0, 3.0));
    assert_eq!(SceneFile::from_scene(&s.scene().unwrap()), s);

    let out = screwkit_core::synth::gen_trajectory(&spec(&two_legs(), (0.002, 0.01)).spec().unwrap()).unwrap();
    let seg = get_screw_segments(&out.trajectory, &Tolerance::COMPLEX_TASK);
    let file = SegmentationFile::from_segmentation(&seg, Some(&Tolerance::COMPLEX_TASK));
    let back = from_json::<SegmentationFile>(&to_json(&file)).unwrap().segmentation().unwrap();
    assert_eq!(back.breakpoints(), seg.breakpoints());
    for (a, b) in seg.segments.iter().zip(&back.segments) {
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.params, b.params);
        assert!(a.end_pose.max_abs_diff(&b.end_pose) < 1e-15);
    }
}

#[test]
fn screw_record_accepts_axis_point() {
    let r: ScrewRecord =
        from_json(r#"{"axis": [0, 0, 2], "point": [1, 0, 0], "pitch": {"finite": 0}, "magnitude": 1}"#).unwrap();
    let s = r.to_params().unwrap();
    assert_eq!(s.axis, Vec3::Z);
    assert_eq!(s.moment, Vec3::new(0.0, -1.0, 0.0));
    let r: ScrewRecord = from_json(r#"{"axis": [0, 1, 0], "pitch": {"infinite": true}, "magnitude": 0.3}"#).unwrap();
    assert!(r.to_params().unwrap().pitch.is_infinite());
    let bad: ScrewRecord = from_json(r#"{"axis": [0, 1, 0], "pitch": {"finite": 0}, "magnitude": 1}"#).unwrap();
    assert!(bad.to_params().is_err());
}
