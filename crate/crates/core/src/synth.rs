//! Synthetic landmark generators with known ground truth.
//!
//! Each builder lays the landmarks out in pixel space from a few physical
//! parameters (palm size, eye aspect ratio, knee angle, ...) and then
//! normalizes by the image size, so measured quantities can be compared
//! against the parameters that produced them. Used by the tests, the shipped
//! fixtures and the examples.

use crate::geometry::rotate;
use crate::model::{
    hand_idx, pose_idx, FaceFrame, HandFrame, Handedness, ImageDims, Point2, Point3, PoseFrame,
    PoseLandmark,
};

fn normalize(p: Point2, dims: ImageDims) -> Point2 {
    Point2::new(p.x / dims.w as f64, p.y / dims.h as f64)
}

/// Direction at `deg` from straight down, counter-clockwise on screen.
fn from_down(deg: f64) -> Point2 {
    let r = deg.to_radians();
    Point2::new(-r.sin(), r.cos())
}

fn add(a: Point2, b: Point2, k: f64) -> Point2 {
    Point2::new(a.x + k * b.x, a.y + k * b.y)
}

/// An upright hand, palm toward the camera, fingers pointing up.
#[derive(Debug, Clone, PartialEq)]
pub struct HandSpec {
    pub handedness: Handedness,
    /// Wrist position in pixels.
    pub wrist_px: Point2,
    /// Wrist to middle-finger MCP distance in pixels.
    pub palm_px: f64,
    /// Interior angle at the middle joint of each finger (thumb first);
    /// 180 is straight.
    pub finger_deg: [f64; 5],
    /// Places the thumb tip this many palm lengths from the index tip.
    pub pinch: Option<f64>,
    /// Rotation of the whole hand about the wrist, clockwise on screen. At
    /// 180 the hand hangs down and reads as idle.
    pub rotation_deg: f64,
    /// Mirror the hand in place so the back of the hand faces the camera.
    pub palm_away: bool,
    pub score: f64,
}

impl HandSpec {
    pub fn open(handedness: Handedness, wrist_px: Point2, palm_px: f64) -> Self {
        HandSpec {
            handedness,
            wrist_px,
            palm_px,
            finger_deg: [180.0; 5],
            pinch: None,
            rotation_deg: 0.0,
            palm_away: false,
            score: 0.95,
        }
    }

    pub fn with_fingers(mut self, finger_deg: [f64; 5]) -> Self {
        self.finger_deg = finger_deg;
        self
    }

    pub fn fist(handedness: Handedness, wrist_px: Point2, palm_px: f64) -> Self {
        Self::open(handedness, wrist_px, palm_px).with_fingers([100.0, 40.0, 40.0, 40.0, 40.0])
    }

    pub fn pinching(mut self, ratio: f64) -> Self {
        self.pinch = Some(ratio);
        self
    }

    pub fn hanging(mut self) -> Self {
        self.rotation_deg = 180.0;
        self
    }

    /// Pixel offset of the index tip from the wrist, before rotation.
    pub fn index_tip_offset(&self) -> Point2 {
        let pts = self.local_points();
        pts[hand_idx::INDEX_TIP]
    }

    /// Hand layout relative to the wrist, in pixels, for a right hand with
    /// its palm to the camera: thumb toward image-left.
    fn local_points(&self) -> [Point2; 21] {
        let p = self.palm_px;
        let at = |x: f64, y: f64| Point2::new(x * p, y * p);
        let mut pts = [Point2::new(0.0, 0.0); 21];
        pts[1] = at(-0.25, -0.15);
        let bases = [
            (2, at(-0.45, -0.35)),
            (5, at(-0.3, -0.95)),
            (9, at(0.0, -1.0)),
            (13, at(0.22, -0.95)),
            (17, at(0.42, -0.85)),
        ];
        let lengths = [
            [0.25, 0.25, 0.2],
            [0.4, 0.25, 0.2],
            [0.45, 0.28, 0.22],
            [0.42, 0.26, 0.2],
            [0.32, 0.2, 0.18],
        ];
        for (f, &(base, base_pt)) in bases.iter().enumerate() {
            pts[base] = base_pt;
            let [l1, l2, l3] = lengths[f];
            // the thumb leans outward; the fingers point straight up
            let up = if f == 0 {
                from_down(180.0 - 35.0)
            } else {
                from_down(180.0)
            };
            let pip = add(base_pt, up, l1 * p);
            let bend = 180.0 - self.finger_deg[f];
            let r = bend.to_radians();
            let dir = Point2::new(
                up.x * r.cos() - up.y * r.sin(),
                up.x * r.sin() + up.y * r.cos(),
            );
            let dip = add(pip, dir, l2 * p);
            let tip = add(dip, dir, l3 * p);
            pts[base + 1] = pip;
            pts[base + 2] = dip;
            pts[base + 3] = tip;
        }
        if let Some(ratio) = self.pinch {
            let tip = pts[hand_idx::INDEX_TIP];
            let a = 20f64.to_radians();
            pts[hand_idx::THUMB_TIP] =
                Point2::new(tip.x - ratio * p * a.cos(), tip.y + ratio * p * a.sin());
        }
        pts
    }

    pub fn build(&self, dims: ImageDims) -> HandFrame {
        let origin = Point2::new(0.0, 0.0);
        // a left hand is the mirror image of a right hand
        let mirror = (self.handedness == Handedness::Left) != self.palm_away;
        let points = self.local_points().map(|q| {
            let q = if mirror { Point2::new(-q.x, q.y) } else { q };
            let q = rotate(q, origin, self.rotation_deg);
            let n = normalize(
                Point2::new(self.wrist_px.x + q.x, self.wrist_px.y + q.y),
                dims,
            );
            Point3::new(n.x, n.y, 0.0)
        });
        HandFrame {
            handedness: self.handedness,
            score: self.score,
            points,
        }
    }
}

/// A face built around the midpoint between the eyes.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSpec {
    /// Midpoint between the eye centres, in pixels.
    pub center_px: Point2,
    /// Distance between the eye centres in pixels.
    pub interocular_px: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub ear_left: f64,
    pub ear_right: f64,
    pub mar: f64,
    pub iris_diameter_px: Option<f64>,
    /// Iris displacement from the eye-corner midpoint in half-eye-widths,
    /// positive toward image-right and image-down.
    pub iris_offset: (f64, f64),
    /// Nose position between eye line and chin on a level head.
    pub pitch_ref_ratio: f64,
}

impl FaceSpec {
    pub fn frontal(center_px: Point2, interocular_px: f64) -> Self {
        FaceSpec {
            center_px,
            interocular_px,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            roll_deg: 0.0,
            ear_left: 0.3,
            ear_right: 0.3,
            mar: 0.1,
            iris_diameter_px: None,
            iris_offset: (0.0, 0.0),
            pitch_ref_ratio: 0.45,
        }
    }

    pub fn eye_width_px(&self) -> f64 {
        0.45 * self.interocular_px
    }

    fn eye(&self, cx: f64, ear: f64) -> [Point2; 6] {
        let w = self.eye_width_px();
        let h = ear * w;
        [
            Point2::new(cx - w / 2.0, 0.0),
            Point2::new(cx - w / 6.0, -h / 2.0),
            Point2::new(cx + w / 6.0, -h / 2.0),
            Point2::new(cx + w / 2.0, 0.0),
            Point2::new(cx + w / 6.0, h / 2.0),
            Point2::new(cx - w / 6.0, h / 2.0),
        ]
    }

    fn iris(&self, cx: f64, d: f64) -> [Point2; 5] {
        let half = self.eye_width_px() / 2.0;
        let c = Point2::new(cx + self.iris_offset.0 * half, self.iris_offset.1 * half);
        let r = d / 2.0;
        [
            c,
            Point2::new(c.x + r, c.y),
            Point2::new(c.x, c.y - r),
            Point2::new(c.x - r, c.y),
            Point2::new(c.x, c.y + r),
        ]
    }

    pub fn build(&self, dims: ImageDims) -> FaceFrame {
        let s = self.interocular_px;
        let jaw_half = 0.95 * s;
        let jaw_top = 0.1 * s;
        let chin_y = 1.25 * s;
        let mut pts = [Point2::new(0.0, 0.0); 68];
        for (k, p) in pts.iter_mut().enumerate().take(17) {
            let phi = std::f64::consts::PI * k as f64 / 16.0;
            *p = Point2::new(
                -jaw_half * phi.cos(),
                jaw_top + (chin_y - jaw_top) * phi.sin(),
            );
        }
        for k in 0..5 {
            let f = k as f64 / 4.0;
            pts[17 + k] = Point2::new(-s / 2.0 - 0.3 * s + 0.6 * s * f, -0.35 * s);
            pts[22 + k] = Point2::new(s / 2.0 - 0.3 * s + 0.6 * s * f, -0.35 * s);
        }
        let nose_x = self.yaw_deg.to_radians().sin() * jaw_half;
        let nose_y = self.pitch_ref_ratio * (1.0 - self.pitch_deg.to_radians().sin()) * chin_y;
        for k in 0..4 {
            let f = (k as f64 + 1.0) / 4.0;
            pts[27 + k] = Point2::new(nose_x * f, 0.05 * s + (nose_y - 0.05 * s) * f);
        }
        for k in 0..5 {
            pts[31 + k] = Point2::new(nose_x + (k as f64 - 2.0) * 0.08 * s, nose_y + 0.1 * s);
        }
        let left = self.eye(-s / 2.0, self.ear_left);
        let right = self.eye(s / 2.0, self.ear_right);
        pts[36..42].copy_from_slice(&left);
        pts[42..48].copy_from_slice(&right);
        let mouth_y = 0.85 * s;
        for k in 0..12 {
            let a = std::f64::consts::TAU * k as f64 / 12.0;
            pts[48 + k] = Point2::new(-0.4 * s * a.cos(), mouth_y - 0.15 * s * a.sin());
        }
        let mw = 0.6 * s;
        let g = self.mar * mw;
        let inner = [
            Point2::new(-mw / 2.0, mouth_y),
            Point2::new(-mw / 4.0, mouth_y - g / 2.0),
            Point2::new(0.0, mouth_y - g / 2.0),
            Point2::new(mw / 4.0, mouth_y - g / 2.0),
            Point2::new(mw / 2.0, mouth_y),
            Point2::new(mw / 4.0, mouth_y + g / 2.0),
            Point2::new(0.0, mouth_y + g / 2.0),
            Point2::new(-mw / 4.0, mouth_y + g / 2.0),
        ];
        pts[60..68].copy_from_slice(&inner);

        let origin = Point2::new(0.0, 0.0);
        let place = |q: Point2| {
            let q = rotate(q, origin, self.roll_deg);
            normalize(
                Point2::new(self.center_px.x + q.x, self.center_px.y + q.y),
                dims,
            )
        };
        let irises = self.iris_diameter_px.map(|d| {
            (
                self.iris(-s / 2.0, d).map(place),
                self.iris(s / 2.0, d).map(place),
            )
        });
        FaceFrame {
            points68: pts.map(place),
            iris_left: irises.map(|i| i.0),
            iris_right: irises.map(|i| i.1),
        }
    }
}

/// A front-facing skeleton hanging from the hip midpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSpec {
    pub hip_mid_px: Point2,
    /// Shoulder-midpoint to hip-midpoint distance in pixels.
    pub torso_px: f64,
    pub knee_left_deg: f64,
    pub knee_right_deg: f64,
    /// Shoulder-to-wrist distance over arm length, in (0, 1].
    pub reach_left: f64,
    pub reach_right: f64,
    /// Raises one foot by swinging the leg about the hip, in pixels.
    pub ankle_lift_left_px: f64,
    pub ankle_lift_right_px: f64,
    pub visibility: f64,
    /// Landmarks reported with visibility 0.2.
    pub hidden: Vec<usize>,
    pub nose_mm: Option<f64>,
}

impl PoseSpec {
    pub fn standing(hip_mid_px: Point2, torso_px: f64) -> Self {
        PoseSpec {
            hip_mid_px,
            torso_px,
            knee_left_deg: 180.0,
            knee_right_deg: 180.0,
            reach_left: 0.5,
            reach_right: 0.5,
            ankle_lift_left_px: 0.0,
            ankle_lift_right_px: 0.0,
            visibility: 0.99,
            hidden: Vec::new(),
            nose_mm: None,
        }
    }

    pub fn with_knees(mut self, left: f64, right: f64) -> Self {
        self.knee_left_deg = left;
        self.knee_right_deg = right;
        self
    }

    pub fn with_reach(mut self, left: f64, right: f64) -> Self {
        self.reach_left = left;
        self.reach_right = right;
        self
    }

    /// Thigh and shin length in pixels.
    pub fn segment_px(&self) -> f64 {
        0.9 * self.torso_px
    }

    fn leg(&self, hip: Point2, knee_deg: f64, lift: f64) -> (Point2, Point2) {
        let seg = self.segment_px();
        let beta = (180.0 - knee_deg) / 2.0;
        let knee = add(hip, from_down(beta), seg);
        let ankle = add(knee, from_down(-beta), seg);
        if lift <= 0.0 {
            return (knee, ankle);
        }
        // swing about the hip until the ankle is `lift` higher
        let v = ankle - hip;
        let len = (v.x * v.x + v.y * v.y).sqrt();
        let target_y = (v.y - lift).max(-len);
        let target = Point2::new((len * len - target_y * target_y).max(0.0).sqrt(), target_y);
        let swing = target.y.atan2(target.x) - v.y.atan2(v.x);
        let turn = |p: Point2| rotate(p, hip, swing.to_degrees());
        (turn(knee), turn(ankle))
    }

    fn arm(&self, shoulder: Point2, reach: f64, outward: f64) -> (Point2, Point2) {
        let seg = 0.55 * self.torso_px;
        let elbow_deg = 2.0 * reach.clamp(0.0, 1.0).asin().to_degrees();
        let elbow = Point2::new(shoulder.x + outward * seg, shoulder.y);
        let fold = (180.0 - elbow_deg).to_radians();
        let wrist = Point2::new(
            elbow.x + outward * seg * fold.cos(),
            elbow.y - seg * fold.sin(),
        );
        (elbow, wrist)
    }

    pub fn build(&self, dims: ImageDims) -> PoseFrame {
        use pose_idx as i;
        let t = self.torso_px;
        let h = self.hip_mid_px;
        let mut pts = [Point2::new(0.0, 0.0); 33];
        let shoulder_mid = Point2::new(h.x, h.y - t);
        pts[i::LEFT_SHOULDER] = Point2::new(shoulder_mid.x + 0.35 * t, shoulder_mid.y);
        pts[i::RIGHT_SHOULDER] = Point2::new(shoulder_mid.x - 0.35 * t, shoulder_mid.y);
        pts[i::LEFT_HIP] = Point2::new(h.x + 0.2 * t, h.y);
        pts[i::RIGHT_HIP] = Point2::new(h.x - 0.2 * t, h.y);
        let nose = Point2::new(shoulder_mid.x, shoulder_mid.y - 0.45 * t);
        pts[i::NOSE] = nose;
        for (k, p) in pts.iter_mut().enumerate().take(11).skip(1) {
            let side = if k % 2 == 0 { -1.0 } else { 1.0 };
            *p = Point2::new(
                nose.x + side * 0.05 * t * (1 + k / 4) as f64,
                nose.y - 0.05 * t + 0.02 * t * k as f64,
            );
        }
        let (le, lw) = self.arm(pts[i::LEFT_SHOULDER], self.reach_left, 1.0);
        let (re, rw) = self.arm(pts[i::RIGHT_SHOULDER], self.reach_right, -1.0);
        pts[i::LEFT_ELBOW] = le;
        pts[i::LEFT_WRIST] = lw;
        pts[i::RIGHT_ELBOW] = re;
        pts[i::RIGHT_WRIST] = rw;
        for (k, w, side) in [
            (17, lw, 1.0),
            (18, rw, -1.0),
            (19, lw, 1.0),
            (20, rw, -1.0),
            (21, lw, 1.0),
            (22, rw, -1.0),
        ] {
            pts[k] = Point2::new(
                w.x + side * 0.05 * t,
                w.y - 0.02 * t * ((k - 17) / 2) as f64,
            );
        }
        let (lk, la) = self.leg(
            pts[i::LEFT_HIP],
            self.knee_left_deg,
            self.ankle_lift_left_px,
        );
        let (rk, ra) = self.leg(
            pts[i::RIGHT_HIP],
            self.knee_right_deg,
            self.ankle_lift_right_px,
        );
        pts[i::LEFT_KNEE] = lk;
        pts[i::LEFT_ANKLE] = la;
        pts[i::RIGHT_KNEE] = rk;
        pts[i::RIGHT_ANKLE] = ra;
        for (k, a, dx, dy) in [
            (29, la, 0.0, 0.05),
            (30, ra, 0.0, 0.05),
            (31, la, 0.12, 0.08),
            (32, ra, -0.12, 0.08),
        ] {
            pts[k] = Point2::new(a.x + dx * t, a.y + dy * t);
        }
        let mut out = [PoseLandmark {
            point: Point3::new(0.0, 0.0, 0.0),
            visibility: 0.0,
        }; 33];
        for (k, p) in pts.iter().enumerate() {
            let n = normalize(*p, dims);
            let vis = if self.hidden.contains(&k) {
                0.2
            } else {
                self.visibility
            };
            out[k] = PoseLandmark {
                point: Point3::new(n.x, n.y, 0.0),
                visibility: vis,
            };
        }
        PoseFrame {
            points: out,
            metric_nose_depth_mm: self.nose_mm,
        }
    }
}

/// Frame timestamps for `seconds` of capture at `fps`.
pub fn timestamps(fps: f64, seconds: f64) -> impl Iterator<Item = f64> {
    let n = (fps * seconds).round() as usize;
    (0..n).map(move |k| k as f64 * 1000.0 / fps)
}

/// Knee angle for a squat cycle: 175 degrees standing, dipping to `bottom`
/// once per `period_ms`, starting upright.
pub fn squat_angle(t_ms: f64, period_ms: f64, bottom: f64) -> f64 {
    let phase = std::f64::consts::TAU * t_ms / period_ms;
    let top = 175.0;
    top - (top - bottom) * (1.0 - phase.cos()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exercise::extract_features;
    use crate::face::{face_ears, face_mar, head_pose};
    use crate::hand::{finger_angles, is_idle, palm_facing, palm_size_px, pinch_ratio, PalmFacing};

    const DIMS: ImageDims = ImageDims::new(1280, 720);

    #[test]
    fn hand_parameters_are_recovered() {
        for side in [Handedness::Right, Handedness::Left] {
            let spec = HandSpec::open(side, Point2::new(640.0, 500.0), 120.0)
                .with_fingers([180.0, 170.0, 90.0, 145.0, 40.0]);
            let h = spec.build(DIMS);
            assert!((palm_size_px(&h, DIMS).unwrap() - 120.0).abs() < 1e-9);
            assert_eq!(palm_facing(&h, DIMS).unwrap(), PalmFacing::TowardCamera);
            assert!(!is_idle(Some(&h), DIMS));
            let a = finger_angles(&h, DIMS).unwrap();
            for (got, want) in a.iter().zip(spec.finger_deg) {
                assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            }
            assert!(is_idle(Some(&spec.clone().hanging().build(DIMS)), DIMS));
            let away = HandSpec {
                palm_away: true,
                ..spec.clone()
            }
            .build(DIMS);
            assert_eq!(palm_facing(&away, DIMS).unwrap(), PalmFacing::Away);
            let pinched = spec.pinching(0.2).build(DIMS);
            assert!((pinch_ratio(&pinched, DIMS).unwrap() - 0.2).abs() < 1e-9);
            assert!(!is_idle(Some(&pinched), DIMS));
        }
    }

    #[test]
    fn face_parameters_are_recovered() {
        let mut spec = FaceSpec::frontal(Point2::new(600.0, 300.0), 120.0);
        spec.ear_left = 0.12;
        spec.ear_right = 0.31;
        spec.mar = 0.6;
        spec.yaw_deg = -23.0;
        spec.pitch_deg = 8.0;
        spec.roll_deg = 12.0;
        let f = spec.build(DIMS);
        let (l, r) = face_ears(&f, DIMS).unwrap();
        assert!((l - 0.12).abs() < 1e-9 && (r - 0.31).abs() < 1e-9);
        assert!((face_mar(&f, DIMS).unwrap() - 0.6).abs() < 1e-9);
        let pose = head_pose(&f, DIMS, 0.45).unwrap();
        assert!((pose.yaw + 23.0).abs() < 1e-9, "{pose:?}");
        assert!((pose.pitch - 8.0).abs() < 1e-9, "{pose:?}");
        assert!((pose.roll - 12.0).abs() < 1e-9, "{pose:?}");
    }

    #[test]
    fn skeleton_parameters_are_recovered() {
        let spec = PoseSpec::standing(Point2::new(640.0, 360.0), 150.0)
            .with_knees(80.0, 131.0)
            .with_reach(0.95, 0.3);
        let f = extract_features(&spec.build(DIMS), DIMS, 0.5);
        assert!((f.knee_left.unwrap() - 80.0).abs() < 1e-9);
        assert!((f.knee_right.unwrap() - 131.0).abs() < 1e-9);
        assert!((f.reach_left.unwrap() - 0.95).abs() < 1e-9);
        assert!((f.reach_right.unwrap() - 0.3).abs() < 1e-9);
        assert!((f.torso_len.unwrap() - 150.0).abs() < 1e-9);
        assert!((f.hip_mid_y.unwrap() - 360.0).abs() < 1e-9);

        let base = extract_features(
            &PoseSpec::standing(Point2::new(640.0, 360.0), 150.0).build(DIMS),
            DIMS,
            0.5,
        );
        let mut kick = PoseSpec::standing(Point2::new(640.0, 360.0), 150.0);
        kick.ankle_lift_left_px = 90.0;
        let k = extract_features(&kick.build(DIMS), DIMS, 0.5);
        assert!((base.ankle_left_y.unwrap() - k.ankle_left_y.unwrap() - 90.0).abs() < 1e-9);
        assert!(
            (k.knee_left.unwrap() - 180.0).abs() < 1e-4,
            "{:?}",
            k.knee_left
        );
    }
}
