//! Deterministic scenario traces: the shipped fixtures and the larger
//! synthetic sessions used by the acceptance suite.
//!
//! Each scenario pairs a frame sequence with the configuration document it is
//! meant to be replayed under. The frames carry the ground truth (pinch ratio,
//! eye aspect ratios, knee angles) in their construction, so tests can derive
//! the expected commands without running the engine.

use serde_json::json;

use crate::model::{serialize_frame, Handedness, ImageDims, LandmarkFrame, Point2};
use crate::synth::{squat_angle, timestamps, FaceSpec, HandSpec, PoseSpec};

pub const FPS: f64 = 30.0;
pub const VGA: ImageDims = ImageDims::new(640, 480);

/// Pinch ratio per frame of the `pinch_click` scenario.
pub const PINCH_OPEN: f64 = 0.8;
pub const PINCH_CLOSED: f64 = 0.2;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    /// TOML configuration the fixture is replayed under.
    pub config: &'static str,
    pub frames: Vec<LandmarkFrame>,
}

impl Scenario {
    /// Fixture text: a provider header line followed by one frame per line.
    pub fn to_ndjson(&self) -> String {
        let mut out =
            json!({"meta": {"source": "synthetic", "scenario": self.name, "fps": FPS}}).to_string();
        out.push('\n');
        for f in &self.frames {
            out.push_str(&serialize_frame(f));
            out.push('\n');
        }
        out
    }
}

pub const HAND_CONFIG: &str = "# hand only, clinical bindings (the defaults)\n";

pub const HEAD_CONFIG: &str = r#"profile = "creativity"

[modules]
hand = false
head = true
"#;

pub const SQUAT_CONFIG: &str = r#"profile = "gaming"
mode = "standing"

[modules]
hand = false
exercise = true
"#;

pub const CYCLING_CONFIG: &str = r#"profile = "gaming"
mode = "sitting"

[modules]
hand = false
exercise = true
"#;

pub const ALL_MODULES_CONFIG: &str = r#"profile = "gaming"
mode = "standing"

[modules]
hand = true
head = true
gaze = true
exercise = true
"#;

fn frame(t_ms: f64) -> LandmarkFrame {
    LandmarkFrame::empty(t_ms, VGA)
}

fn with_hand(t_ms: f64, spec: &HandSpec) -> LandmarkFrame {
    LandmarkFrame {
        hands: vec![spec.build(VGA)],
        ..frame(t_ms)
    }
}

fn ts(n: usize) -> Vec<f64> {
    timestamps(FPS, n as f64 / FPS).collect()
}

fn ramp(from: f64, to: f64, steps: usize) -> impl Iterator<Item = f64> {
    (1..=steps).map(move |k| from + (to - from) * k as f64 / steps as f64)
}

fn pointing_hand() -> HandSpec {
    HandSpec::open(Handedness::Right, Point2::new(320.0, 330.0), 90.0)
}

/// Pinch ratio of every frame in `pinch_click`, `None` where the hand hangs
/// idle or is absent.
pub fn pinch_click_ratios() -> Vec<Option<f64>> {
    let mut r: Vec<Option<f64>> = vec![Some(PINCH_OPEN); 15];
    for _ in 0..2 {
        r.extend(ramp(PINCH_OPEN, PINCH_CLOSED, 6).map(Some));
        r.extend([Some(PINCH_CLOSED); 4]);
        r.extend(ramp(PINCH_CLOSED, PINCH_OPEN, 6).map(Some));
        r.extend([Some(PINCH_OPEN); 10]);
    }
    r.extend([None; 20]);
    r
}

/// A right hand becomes active, clicks twice by pinching and then hangs
/// idle and leaves.
pub fn pinch_click() -> Scenario {
    let ratios = pinch_click_ratios();
    let n = ratios.len();
    let frames = ts(n)
        .into_iter()
        .zip(ratios)
        .enumerate()
        .map(|(k, (t, r))| match r {
            Some(r) => with_hand(t, &pointing_hand().pinching(r)),
            None if k < n - 5 => with_hand(t, &pointing_hand().hanging()),
            None => frame(t),
        })
        .collect();
    Scenario {
        name: "pinch_click",
        config: HAND_CONFIG,
        frames,
    }
}

/// Hands that never qualify as active: hanging, palm turned away, index
/// resting below the thumb, or absent.
pub fn idle_hand() -> Scenario {
    let t = ts(120);
    let mut relaxed = pointing_hand().hanging();
    relaxed.rotation_deg = 150.0;
    let frames = t
        .into_iter()
        .enumerate()
        .map(|(k, t)| match k / 30 {
            0 => with_hand(t, &pointing_hand().hanging()),
            1 => with_hand(
                t,
                &HandSpec {
                    palm_away: true,
                    ..pointing_hand()
                },
            ),
            2 => with_hand(t, &relaxed.clone().pinching(0.2)),
            _ => frame(t),
        })
        .collect();
    Scenario {
        name: "idle_hand",
        config: HAND_CONFIG,
        frames,
    }
}

/// Wrist position (pixels) where the `daoi_diagonal` hand becomes active.
pub const DIAGONAL_ANCHOR: Point2 = Point2::new(320.0, 200.0);
pub const DIAGONAL_PALM_PX: f64 = 90.0;
/// Frame range during which the index tip sweeps the DAoI diagonal.
pub const DIAGONAL_SWEEP: std::ops::Range<usize> = 45..135;

/// The index tip sweeps the DAoI from beyond its top-left corner to beyond
/// its bottom-right corner. The DAoI is anchored at the wrist position where
/// the hand became active and its size follows the default `c_scale` and a
/// 16:9 screen.
pub fn daoi_diagonal() -> Scenario {
    let base = HandSpec::open(Handedness::Right, DIAGONAL_ANCHOR, DIAGONAL_PALM_PX);
    let off = base.index_tip_offset();
    let w_px = 3.0 * DIAGONAL_PALM_PX;
    let h_px = w_px / (16.0 / 9.0) * VGA.h as f64 / VGA.w as f64;
    let margin = 8.0;
    let tl = Point2::new(
        DIAGONAL_ANCHOR.x - w_px / 2.0 - margin,
        DIAGONAL_ANCHOR.y - h_px / 2.0 - margin,
    );
    let br = Point2::new(
        DIAGONAL_ANCHOR.x + w_px / 2.0 + margin,
        DIAGONAL_ANCHOR.y + h_px / 2.0 + margin,
    );
    let wrist_for_tip = |tip: Point2| Point2::new(tip.x - off.x, tip.y - off.y);
    let start = wrist_for_tip(tl);
    let end = wrist_for_tip(br);
    let lerp =
        |a: Point2, b: Point2, s: f64| Point2::new(a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s);

    let sweep = DIAGONAL_SWEEP;
    let frames = ts(165)
        .into_iter()
        .enumerate()
        .map(|(k, t)| {
            let wrist = if k < 15 {
                DIAGONAL_ANCHOR
            } else if k < 30 {
                lerp(DIAGONAL_ANCHOR, start, (k - 14) as f64 / 15.0)
            } else if k < sweep.start {
                start
            } else if k < sweep.end {
                lerp(
                    start,
                    end,
                    (k - sweep.start + 1) as f64 / sweep.len() as f64,
                )
            } else {
                end
            };
            with_hand(
                t,
                &HandSpec {
                    wrist_px: wrist,
                    ..base.clone()
                },
            )
        })
        .collect();
    Scenario {
        name: "daoi_diagonal",
        config: HAND_CONFIG,
        frames,
    }
}

/// Eye aspect ratios (left, right) and mouth aspect ratio per frame of
/// `blink_wink`.
pub fn blink_wink_trace() -> Vec<(f64, f64, f64)> {
    let open = (0.3, 0.3, 0.1);
    let mut v = vec![open; 10];
    v.extend([(0.1, 0.1, 0.1); 3]);
    v.extend([open; 10]);
    v.extend([(0.1, 0.3, 0.1); 5]);
    v.extend([open; 10]);
    v.extend([(0.3, 0.1, 0.1); 5]);
    v.extend([open; 10]);
    v.extend([(0.3, 0.3, 0.7); 10]);
    v.extend([open; 10]);
    v
}

/// A frontal face blinks, winks each eye and opens the mouth once.
pub fn blink_wink() -> Scenario {
    let trace = blink_wink_trace();
    let frames = ts(trace.len())
        .into_iter()
        .zip(trace)
        .map(|(t, (l, r, m))| LandmarkFrame {
            face: Some(
                FaceSpec {
                    ear_left: l,
                    ear_right: r,
                    mar: m,
                    ..FaceSpec::frontal(Point2::new(320.0, 220.0), 70.0)
                }
                .build(VGA),
            ),
            ..frame(t)
        })
        .collect();
    Scenario {
        name: "blink_wink",
        config: HEAD_CONFIG,
        frames,
    }
}

pub fn skeleton() -> PoseSpec {
    PoseSpec::standing(Point2::new(320.0, 250.0), 100.0)
}

fn with_pose(t_ms: f64, spec: &PoseSpec) -> LandmarkFrame {
    LandmarkFrame {
        pose: Some(spec.build(VGA)),
        ..frame(t_ms)
    }
}

/// `reps` squats of `period_ms` down to `bottom_deg`, then one second of
/// standing.
pub fn squat_trace(reps: usize, period_ms: f64, bottom_deg: f64) -> Vec<(f64, f64)> {
    let n = (reps as f64 * period_ms / 1000.0 * FPS).round() as usize + FPS as usize;
    ts(n)
        .into_iter()
        .map(|t| {
            let a = if t < reps as f64 * period_ms {
                squat_angle(t, period_ms, bottom_deg)
            } else {
                175.0
            };
            (t, a)
        })
        .collect()
}

pub fn squat_reps() -> Scenario {
    let frames = squat_trace(5, 2000.0, 80.0)
        .into_iter()
        .map(|(t, a)| with_pose(t, &skeleton().with_knees(a, a)))
        .collect();
    Scenario {
        name: "squat_reps",
        config: SQUAT_CONFIG,
        frames,
    }
}

/// Anti-phase knee angles of a pedalling rider: `(left, right)` at `t_ms`.
pub fn pedal_knees(t_ms: f64, period_ms: f64) -> (f64, f64) {
    let s = (std::f64::consts::TAU * t_ms / period_ms).sin();
    (130.0 + 25.0 * s, 130.0 - 25.0 * s)
}

/// Ten seconds of pedalling at 1 Hz; the stream ends while cycling is
/// still active.
pub fn gaming_cycling() -> Scenario {
    let frames = ts(300)
        .into_iter()
        .map(|t| {
            let (l, r) = pedal_knees(t, 1000.0);
            with_pose(t, &skeleton().with_knees(l, r))
        })
        .collect();
    Scenario {
        name: "gaming_cycling",
        config: CYCLING_CONFIG,
        frames,
    }
}

/// Iris diameter in pixels that puts a subject at `depth_mm` under the
/// default intrinsics (focal length equal to the image width).
pub fn iris_px_at(depth_mm: f64) -> f64 {
    VGA.w as f64 * 11.7 / depth_mm
}

/// The `pinch_click` session with a face whose irises place the user
/// `depth_mm` from the camera.
pub fn pinch_click_at(depth_mm: f64) -> Vec<LandmarkFrame> {
    let face = FaceSpec {
        iris_diameter_px: Some(iris_px_at(depth_mm)),
        ..FaceSpec::frontal(Point2::new(330.0, 120.0), 30.0)
    }
    .build(VGA);
    pinch_click()
        .frames
        .into_iter()
        .map(|f| LandmarkFrame {
            face: Some(face.clone()),
            ..f
        })
        .collect()
}

/// Pinch clicks performed 2.5 m from the camera, beyond the default range.
pub fn range_far() -> Scenario {
    Scenario {
        name: "range_far",
        config: HAND_CONFIG,
        frames: pinch_click_at(2500.0),
    }
}

/// Every shipped fixture.
pub fn shipped() -> Vec<Scenario> {
    vec![
        pinch_click(),
        idle_hand(),
        daoi_diagonal(),
        blink_wink(),
        squat_reps(),
        gaming_cycling(),
        range_far(),
    ]
}

/// A busy session for throughput runs: two hands, a face with irises and a
/// full skeleton in every frame, all moving.
pub fn all_modules(seconds: f64) -> Scenario {
    let frames = timestamps(FPS, seconds)
        .map(|t| {
            let s = t / 1000.0;
            let right = HandSpec::open(
                Handedness::Right,
                Point2::new(
                    380.0 + 60.0 * (0.7 * s).sin(),
                    330.0 + 30.0 * (0.9 * s).cos(),
                ),
                90.0,
            )
            .pinching(0.5 + 0.3 * (1.3 * s).sin());
            let left = HandSpec::open(Handedness::Left, Point2::new(200.0, 360.0), 80.0)
                .with_fingers([
                    180.0,
                    180.0,
                    180.0 - 60.0 * (0.5 * s).sin().abs(),
                    170.0,
                    170.0,
                ]);
            let face = FaceSpec {
                yaw_deg: 20.0 * (0.4 * s).sin(),
                pitch_deg: 8.0 * (0.3 * s).cos(),
                ear_left: 0.3 - 0.15 * (2.1 * s).sin().max(0.0),
                ear_right: 0.3 - 0.15 * (2.1 * s).sin().max(0.0),
                mar: 0.3 + 0.3 * (0.8 * s).sin(),
                iris_diameter_px: Some(iris_px_at(650.0)),
                iris_offset: (0.3 * (0.6 * s).sin(), 0.2 * (0.5 * s).cos()),
                ..FaceSpec::frontal(Point2::new(320.0, 110.0), 40.0)
            };
            let (kl, kr) = pedal_knees(t, 1200.0);
            let pose = PoseSpec {
                reach_left: 0.6 + 0.35 * (3.0 * s).sin(),
                reach_right: 0.6 + 0.35 * (3.0 * s).cos(),
                ..skeleton().with_knees(kl, kr)
            };
            LandmarkFrame {
                hands: vec![right.build(VGA), left.build(VGA)],
                face: Some(face.build(VGA)),
                pose: Some(pose.build(VGA)),
                ..frame(t)
            }
        })
        .collect();
    Scenario {
        name: "all_modules",
        config: ALL_MODULES_CONFIG,
        frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_frame;

    #[test]
    fn fixtures_parse_back() {
        for s in shipped() {
            let text = s.to_ndjson();
            let mut lines = text.lines();
            assert!(crate::model::is_header_record(lines.next().unwrap()));
            for (line, f) in lines.zip(&s.frames) {
                assert_eq!(&parse_frame(line).unwrap(), f, "{}", s.name);
            }
            crate::engine::config::load_config(s.config).unwrap();
        }
    }

    #[test]
    fn iris_depth_helper() {
        let d = iris_px_at(2500.0);
        assert!(
            (crate::gaze::depth_from_iris(d, &crate::gaze::CameraModel::for_image(VGA), 11.7)
                .unwrap()
                - 2500.0)
                .abs()
                < 1e-9
        );
    }
}
