mod common;

use common::{gaze_case, GAZE_IMAGE};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use touchless::face::HeadPose;
use touchless::gaze::{
    back_project, depth_from_iris, gaze_direction, gaze_sample, project, resolve_depth,
    screen_point, CameraModel, DepthSource, GazeConfig, ScreenGeometry,
};
use touchless::model::{LandmarkFrame, Point2};
use touchless::synth::{FaceSpec, HandSpec, PoseSpec};
use touchless::Handedness;

fn pose(yaw: f64, pitch: f64) -> HeadPose {
    HeadPose {
        yaw,
        pitch,
        roll: 0.0,
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn direction_is_unit_and_faces_the_screen(
        yaw in -60.0..60.0f64, pitch in -60.0..60.0f64, ox in -0.5..0.5f64, oy in -0.5..0.5f64,
    ) {
        let d = gaze_direction(&pose(yaw, pitch), (ox, oy), 30.0);
        prop_assert!((norm(d) - 1.0).abs() < 1e-12);
        prop_assert!(d[2] < 0.0);
    }

    #[test]
    fn direction_is_continuous(
        yaw in -60.0..60.0f64, pitch in -60.0..60.0f64, dy in -2.0..2.0f64, dp in -2.0..2.0f64,
    ) {
        let a = gaze_direction(&pose(yaw, pitch), (0.0, 0.0), 30.0);
        let b = gaze_direction(&pose(yaw + dy, pitch + dp), (0.0, 0.0), 30.0);
        let chord = norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
        // the chord never exceeds the summed rotation angles
        prop_assert!(chord <= (dy.abs() + dp.abs()).to_radians() + 1e-12);
    }

    #[test]
    fn iris_shift_and_head_turn_are_interchangeable(yaw in -40.0..40.0f64, pitch in -30.0..30.0f64, ox in -0.3..0.3f64, oy in -0.3..0.3f64) {
        let by_iris = gaze_direction(&pose(yaw, pitch), (ox, oy), 30.0);
        let by_head = gaze_direction(&pose(yaw + 30.0 * ox, pitch - 30.0 * oy), (0.0, 0.0), 30.0);
        for k in 0..3 {
            prop_assert!((by_iris[k] - by_head[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_inverts_back_projection(u in 0.0..1280.0f64, v in 0.0..720.0f64, z in 100.0..3000.0f64, f in 300.0..3000.0f64) {
        let cam = CameraModel { f_px: f, cx: 640.0, cy: 360.0 };
        let (pu, pv) = project(back_project(u, v, z, &cam), &cam);
        prop_assert!((pu - u).abs() < 1e-9 && (pv - v).abs() < 1e-9);
    }

    #[test]
    fn iris_depth_is_inverse_in_diameter(d in 1.0..100.0f64, k in 1.1..4.0f64) {
        let cam = CameraModel::for_image(GAZE_IMAGE);
        let a = depth_from_iris(d, &cam, 11.7).unwrap();
        let b = depth_from_iris(k * d, &cam, 11.7).unwrap();
        prop_assert!((a / b - k).abs() < 1e-12 * k);
        prop_assert!((a * d - cam.f_px * 11.7).abs() < 1e-9 * a * d);
    }

    #[test]
    fn gaze_round_trips_through_landmarks(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let screen = ScreenGeometry::default();
        let cfg = GazeConfig::default();
        let case = gaze_case(&mut rng, &screen, cfg.iris_gain_deg);
        let cam = CameraModel::for_image(GAZE_IMAGE);
        let frame = LandmarkFrame { face: Some(case.face.clone()), ..LandmarkFrame::empty(0.0, GAZE_IMAGE) };
        let depth = resolve_depth(&frame, &cam, None, &cfg);
        prop_assert_eq!(depth.source, DepthSource::Iris);
        prop_assert!((depth.depth_mm - case.depth_mm).abs() < 1e-6 * case.depth_mm);
        let sample = gaze_sample(&case.face, GAZE_IMAGE, depth, &cam, &cfg, 0.45).unwrap();
        let (sx, sy) = screen_point(&sample, &screen).expect("target is on screen");
        prop_assert!((sx - case.target.0).abs() < 1.0 && (sy - case.target.1).abs() < 1.0,
            "({}, {}) vs {:?}", sx, sy, case.target);
    }
}

#[test]
fn looking_away_misses_the_screen() {
    let screen = ScreenGeometry::default();
    let cam = CameraModel::for_image(GAZE_IMAGE);
    let mut spec = FaceSpec::frontal(Point2::new(640.0, 360.0), 80.0);
    spec.iris_diameter_px = Some(20.0);
    spec.yaw_deg = 60.0;
    let frame = LandmarkFrame {
        face: Some(spec.build(GAZE_IMAGE)),
        ..LandmarkFrame::empty(0.0, GAZE_IMAGE)
    };
    let cfg = GazeConfig::default();
    let depth = resolve_depth(&frame, &cam, None, &cfg);
    let sample = gaze_sample(
        frame.face.as_ref().unwrap(),
        GAZE_IMAGE,
        depth,
        &cam,
        &cfg,
        0.45,
    )
    .unwrap();
    assert_eq!(screen_point(&sample, &screen), None);
}

#[test]
fn depth_falls_back_in_order() {
    let cam = CameraModel::for_image(GAZE_IMAGE);
    let cfg = GazeConfig::default();
    let bare = LandmarkFrame::empty(0.0, GAZE_IMAGE);
    let d = resolve_depth(&bare, &cam, None, &cfg);
    assert_eq!((d.source, d.depth_mm), (DepthSource::Default, 600.0));

    let hand =
        HandSpec::open(Handedness::Right, Point2::new(640.0, 500.0), 100.0).build(GAZE_IMAGE);
    let with_hand = LandmarkFrame {
        hands: vec![hand],
        ..bare.clone()
    };
    let d = resolve_depth(&with_hand, &cam, Some(60_000.0), &cfg);
    assert_eq!(d.source, DepthSource::Palm);
    assert!((d.depth_mm - 600.0).abs() < 1e-6);
    assert_eq!(
        resolve_depth(&with_hand, &cam, None, &cfg).source,
        DepthSource::Default
    );

    let mut body = PoseSpec::standing(Point2::new(640.0, 500.0), 150.0);
    body.nose_mm = Some(900.0);
    let with_pose = LandmarkFrame {
        pose: Some(body.build(GAZE_IMAGE)),
        ..with_hand.clone()
    };
    let d = resolve_depth(&with_pose, &cam, Some(60_000.0), &cfg);
    assert_eq!((d.source, d.depth_mm), (DepthSource::PoseMetric, 900.0));

    let mut face = FaceSpec::frontal(Point2::new(640.0, 300.0), 90.0);
    face.iris_diameter_px = Some(1280.0 * 11.7 / 750.0);
    let full = LandmarkFrame {
        face: Some(face.build(GAZE_IMAGE)),
        ..with_pose
    };
    let d = resolve_depth(&full, &cam, Some(60_000.0), &cfg);
    assert_eq!(d.source, DepthSource::Iris);
    assert!((d.depth_mm - 750.0).abs() < 1e-6);
}
