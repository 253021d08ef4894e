#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use touchless::engine::command::{InputCommand, MemorySink};
use touchless::engine::config::{load_config, EngineConfig};
use touchless::engine::{run_stream, Engine, ErrorPolicy, RunStats};
use touchless::exercise::GestureTemplate;
use touchless::model::{
    serialize_frame, FaceFrame, HandFrame, Handedness, ImageDims, LandmarkFrame, Point2, Point3,
    PoseFrame, PoseLandmark,
};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn config(doc: &str) -> EngineConfig {
    load_config(doc).expect("valid config")
}

/// Runs frames through a fresh engine, serialized and parsed like a real
/// stream, and returns every command including the shutdown releases.
pub fn run_frames(
    cfg: EngineConfig,
    templates: Vec<GestureTemplate>,
    frames: &[LandmarkFrame],
) -> (Vec<InputCommand>, RunStats) {
    let text: String = frames.iter().map(|f| serialize_frame(f) + "\n").collect();
    let mut engine = Engine::new(cfg, templates).expect("engine");
    let mut sink = MemorySink::default();
    let stats = run_stream(
        &mut engine,
        text.as_bytes(),
        &mut sink,
        ErrorPolicy::Strict,
        &mut (),
    )
    .expect("run");
    (sink.commands, stats)
}

fn p3<R: Rng>(rng: &mut R) -> Point3 {
    Point3::new(rng.random(), rng.random(), rng.random_range(-0.5..0.5))
}

fn p2<R: Rng>(rng: &mut R) -> Point2 {
    Point2::new(rng.random(), rng.random())
}

/// Any schema-valid frame, with each block present or absent at random.
pub fn random_frame<R: Rng>(rng: &mut R, t_ms: f64) -> LandmarkFrame {
    let image = ImageDims::new(rng.random_range(1..4000), rng.random_range(1..4000));
    let mut hands = Vec::new();
    for side in [Handedness::Left, Handedness::Right] {
        if rng.random_bool(0.5) {
            hands.push(HandFrame {
                handedness: side,
                score: rng.random(),
                points: std::array::from_fn(|_| p3(rng)),
            });
        }
    }
    if rng.random_bool(0.5) {
        hands.reverse();
    }
    let face = rng.random_bool(0.5).then(|| FaceFrame {
        points68: std::array::from_fn(|_| p2(rng)),
        iris_left: rng
            .random_bool(0.5)
            .then(|| std::array::from_fn(|_| p2(rng))),
        iris_right: rng
            .random_bool(0.5)
            .then(|| std::array::from_fn(|_| p2(rng))),
    });
    let pose = rng.random_bool(0.5).then(|| PoseFrame {
        points: std::array::from_fn(|_| PoseLandmark {
            point: p3(rng),
            visibility: rng.random(),
        }),
        metric_nose_depth_mm: rng.random_bool(0.5).then(|| rng.random_range(1.0..5000.0)),
    });
    LandmarkFrame {
        t_ms,
        image,
        hands,
        face,
        pose,
    }
}

use rand_distr::{Distribution, Normal};
use touchless::exercise::{ExerciseConfig, ExerciseModule, UseMode};
use touchless::scenario::{pedal_knees, squat_trace, FPS, VGA};
use touchless::synth::PoseSpec;
use touchless::GestureEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepKind {
    Squat,
    Jump,
    Cycling,
}

const HIP: (f64, f64) = (320.0, 250.0);
const TORSO: f64 = 100.0;

/// Timed poses for `n` clean repetitions of `kind`. Squats are 2 s deep
/// bends to 80 deg, jumps are 400 ms parabolic hops of 0.3 torso every
/// second after 1 s of standing, cycling is `n` anti-phase revolutions at
/// 1 Hz followed by 2.5 s of stillness.
pub fn rep_trace(kind: RepKind, n: usize) -> Vec<(f64, PoseSpec)> {
    let base = PoseSpec::standing(Point2::new(HIP.0, HIP.1), TORSO).with_knees(175.0, 175.0);
    let dt = 1000.0 / FPS;
    match kind {
        RepKind::Squat => squat_trace(n, 2000.0, 80.0)
            .into_iter()
            .map(|(t, a)| (t, base.clone().with_knees(a, a)))
            .collect(),
        RepKind::Jump => {
            let frames = ((1000.0 + 1000.0 * n as f64 + 1000.0) / dt).round() as usize;
            (0..frames)
                .map(|i| {
                    let t = i as f64 * dt;
                    let k = ((t - 1000.0) / 1000.0).floor();
                    let s = (t - 1000.0 - 1000.0 * k) / 400.0;
                    let rise = if t >= 1000.0 && (k as usize) < n && s <= 1.0 {
                        0.3 * TORSO * 4.0 * s * (1.0 - s)
                    } else {
                        0.0
                    };
                    let mut p = base.clone();
                    p.hip_mid_px.y -= rise;
                    (t, p)
                })
                .collect()
        }
        RepKind::Cycling => {
            let frames = ((1000.0 * n as f64 + 2500.0) / dt).round() as usize;
            (0..frames)
                .map(|i| {
                    let t = i as f64 * dt;
                    let (l, r) = if t < 1000.0 * n as f64 {
                        pedal_knees(t, 1000.0)
                    } else {
                        (130.0, 130.0)
                    };
                    (t, base.clone().with_knees(l, r))
                })
                .collect()
        }
    }
}

/// Adds Gaussian noise to both knee angles (`angle_sd` deg, capped at 180)
/// and to the hip height (`hip_sd` torso lengths).
pub fn add_noise<R: Rng>(trace: &mut [(f64, PoseSpec)], rng: &mut R, angle_sd: f64, hip_sd: f64) {
    let angle = Normal::new(0.0, angle_sd).unwrap();
    let hip = Normal::new(0.0, hip_sd * TORSO).unwrap();
    for (_, p) in trace.iter_mut() {
        p.knee_left_deg = (p.knee_left_deg + angle.sample(rng)).min(180.0);
        p.knee_right_deg = (p.knee_right_deg + angle.sample(rng)).min(180.0);
        p.hip_mid_px.y += hip.sample(rng);
    }
}

/// Feeds a pose trace straight into an exercise module.
pub fn exercise_events(
    mode: UseMode,
    templates: Vec<GestureTemplate>,
    trace: &[(f64, PoseSpec)],
) -> (Vec<GestureEvent>, ExerciseModule) {
    let mut m = ExerciseModule::new(ExerciseConfig::default(), mode, templates).expect("module");
    let mut out = Vec::new();
    for (t, p) in trace {
        out.extend(m.step(Some(&p.build(VGA)), VGA, *t).expect("step"));
    }
    (out, m)
}

/// Rep events of the detector under test.
pub fn rep_count(kind: RepKind, events: &[GestureEvent]) -> usize {
    use touchless::GestureKind as K;
    events
        .iter()
        .filter(|e| match kind {
            RepKind::Squat => matches!(e.kind, K::SquatRep { .. }),
            RepKind::Jump => matches!(e.kind, K::JumpRep { .. }),
            RepKind::Cycling => matches!(e.kind, K::CycleRep { .. }),
        })
        .count()
}

use touchless::gaze::{CameraModel, ScreenGeometry, IRIS_DIAMETER_MM};
use touchless::synth::FaceSpec;

/// A face whose landmarks encode a known gaze: eyes at a random pixel and
/// depth, looking at a random on-screen target, with the gaze angle split
/// between head rotation and iris displacement.
pub struct GazeCase {
    pub face: FaceFrame,
    pub depth_mm: f64,
    pub target: (f64, f64),
}

pub const GAZE_IMAGE: ImageDims = ImageDims::new(1280, 720);

pub fn gaze_case<R: Rng>(rng: &mut R, screen: &ScreenGeometry, gain_deg: f64) -> GazeCase {
    let cam = CameraModel::for_image(GAZE_IMAGE);
    let (w, h) = (screen.width_px as f64, screen.height_px as f64);
    let target = (rng.random_range(0.0..w), rng.random_range(0.0..h));
    let (u, v) = (
        rng.random_range(400.0..880.0),
        rng.random_range(200.0..520.0),
    );
    let z = rng.random_range(400.0..1200.0);
    let eye = [(u - cam.cx) * z / cam.f_px, (v - cam.cy) * z / cam.f_px, z];
    let t = [
        (target.0 - w / 2.0) * screen.width_mm / w - screen.camera_offset_mm[0],
        target.1 * screen.height_mm / h - screen.camera_offset_mm[1],
        0.0,
    ];
    let d: Vec<f64> = (0..3).map(|k| t[k] - eye[k]).collect();
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    // d = [sin(yaw) cos(pitch), -sin(pitch), -cos(yaw) cos(pitch)]
    let pitch = (-d[1] / n).asin().to_degrees();
    let yaw = d[0].atan2(-d[2]).to_degrees();
    let offset = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
    let interocular = rng.random_range(50.0..120.0);
    let mut spec = FaceSpec::frontal(Point2::new(0.0, 0.0), interocular);
    let half = spec.eye_width_px() / 2.0;
    spec.center_px = Point2::new(u - offset.0 * half, v - offset.1 * half);
    spec.yaw_deg = yaw - gain_deg * offset.0;
    spec.pitch_deg = pitch + gain_deg * offset.1;
    spec.iris_offset = offset;
    spec.iris_diameter_px = Some(cam.f_px * IRIS_DIAMETER_MM / z);
    GazeCase {
        face: spec.build(GAZE_IMAGE),
        depth_mm: z,
        target,
    }
}
