use serde::Serialize;

use crate::error::GestureError;
use crate::geometry::angle_deg;
use crate::model::{pose_idx as idx, to_pixels, ImageDims, Point2, PoseFrame};

/// Interior angle at `b` in degrees.
pub fn joint_angle(a: Point2, b: Point2, c: Point2) -> Result<f64, GestureError> {
    angle_deg(a, b, c).ok_or(GestureError::DegenerateJoint)
}

/// Per-frame skeletal features in pixel space. `None` marks a feature whose
/// landmarks were not visible enough, never a zero reading.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PoseFeatures {
    pub knee_left: Option<f64>,
    pub knee_right: Option<f64>,
    pub elbow_left: Option<f64>,
    pub elbow_right: Option<f64>,
    pub hip_mid_y: Option<f64>,
    pub ankle_left_y: Option<f64>,
    pub ankle_right_y: Option<f64>,
    /// Wrist-to-shoulder distance over arm length.
    pub reach_left: Option<f64>,
    pub reach_right: Option<f64>,
    pub torso_len: Option<f64>,
}

/// Scale- and translation-invariant features usable in templates.
pub const TEMPLATE_FEATURES: [&str; 6] = [
    "knee_left",
    "knee_right",
    "elbow_left",
    "elbow_right",
    "reach_left",
    "reach_right",
];

pub const ALL_FEATURES: [&str; 10] = [
    "knee_left",
    "knee_right",
    "elbow_left",
    "elbow_right",
    "hip_mid_y",
    "ankle_left_y",
    "ankle_right_y",
    "reach_left",
    "reach_right",
    "torso_len",
];

impl PoseFeatures {
    pub fn get(&self, name: &str) -> Option<f64> {
        match name {
            "knee_left" => self.knee_left,
            "knee_right" => self.knee_right,
            "elbow_left" => self.elbow_left,
            "elbow_right" => self.elbow_right,
            "hip_mid_y" => self.hip_mid_y,
            "ankle_left_y" => self.ankle_left_y,
            "ankle_right_y" => self.ankle_right_y,
            "reach_left" => self.reach_left,
            "reach_right" => self.reach_right,
            "torso_len" => self.torso_len,
            _ => None,
        }
    }

    pub fn is_known(name: &str) -> bool {
        ALL_FEATURES.contains(&name)
    }

    pub fn min_knee(&self) -> Option<f64> {
        match (self.knee_left, self.knee_right) {
            (Some(l), Some(r)) => Some(l.min(r)),
            (l, r) => l.or(r),
        }
    }
}

pub fn extract_features(pose: &PoseFrame, dims: ImageDims, min_visibility: f64) -> PoseFeatures {
    let at = |i: usize| -> Option<Point2> {
        let lm = &pose.points[i];
        (lm.visibility >= min_visibility).then(|| to_pixels(&lm.point, dims).xy())
    };
    let angle = |a: usize, b: usize, c: usize| -> Option<f64> { angle_deg(at(a)?, at(b)?, at(c)?) };
    let reach = |shoulder: usize, elbow: usize, wrist: usize| -> Option<f64> {
        let (s, e, w) = (at(shoulder)?, at(elbow)?, at(wrist)?);
        let arm = s.dist(e) + e.dist(w);
        (arm > 0.0).then(|| w.dist(s) / arm)
    };
    let hip_mid = at(idx::LEFT_HIP)
        .zip(at(idx::RIGHT_HIP))
        .map(|(l, r)| l.midpoint(r));
    let shoulder_mid = at(idx::LEFT_SHOULDER)
        .zip(at(idx::RIGHT_SHOULDER))
        .map(|(l, r)| l.midpoint(r));

    PoseFeatures {
        knee_left: angle(idx::LEFT_HIP, idx::LEFT_KNEE, idx::LEFT_ANKLE),
        knee_right: angle(idx::RIGHT_HIP, idx::RIGHT_KNEE, idx::RIGHT_ANKLE),
        elbow_left: angle(idx::LEFT_SHOULDER, idx::LEFT_ELBOW, idx::LEFT_WRIST),
        elbow_right: angle(idx::RIGHT_SHOULDER, idx::RIGHT_ELBOW, idx::RIGHT_WRIST),
        hip_mid_y: hip_mid.map(|p| p.y),
        ankle_left_y: at(idx::LEFT_ANKLE).map(|p| p.y),
        ankle_right_y: at(idx::RIGHT_ANKLE).map(|p| p.y),
        reach_left: reach(idx::LEFT_SHOULDER, idx::LEFT_ELBOW, idx::LEFT_WRIST),
        reach_right: reach(idx::RIGHT_SHOULDER, idx::RIGHT_ELBOW, idx::RIGHT_WRIST),
        torso_len: shoulder_mid
            .zip(hip_mid)
            .map(|(s, h)| s.dist(h))
            .filter(|&d| d > 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructed_angles() {
        let o = Point2::new(0.0, 0.0);
        assert!(
            (joint_angle(Point2::new(0.0, 1.0), o, Point2::new(1.0, 0.0)).unwrap() - 90.0).abs()
                < 1e-12
        );
        let forty = 40f64.to_radians();
        let a = joint_angle(
            Point2::new(1.0, 0.0),
            o,
            Point2::new(forty.cos(), forty.sin()),
        )
        .unwrap();
        assert!((a - 40.0).abs() < 1e-9);
        let straight = joint_angle(Point2::new(0.0, -1.0), o, Point2::new(0.0, 3.0)).unwrap();
        assert!((straight - 180.0).abs() < 1e-12);
        assert_eq!(
            joint_angle(o, o, Point2::new(1.0, 0.0)),
            Err(GestureError::DegenerateJoint)
        );
    }
}
