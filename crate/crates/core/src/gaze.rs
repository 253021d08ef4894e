//! Depth capture and gaze-to-screen mapping.
//!
//! Camera coordinates are millimetres with the origin at the camera, x toward
//! image-right, y toward image-down and z pointing out toward the user. The
//! screen lies in the plane z = 0 and hangs below the camera.

use serde::{Deserialize, Serialize};

use crate::error::GestureError;
use crate::event::{GestureEvent, GestureKind, ModuleId};
use crate::face::{head_pose_px, HeadPose, LEFT_EYE, RIGHT_EYE};
use crate::geometry::centroid;
use crate::hand::{estimate_depth_from_palm, palm_size_px, HandModule};
use crate::model::{to_pixels, FaceFrame, ImageDims, LandmarkFrame, Point2};
use crate::signal::{LowPass2, LowPassParams};

/// Horizontal iris diameter assumed for every user, in millimetres.
pub const IRIS_DIAMETER_MM: f64 = 11.7;

pub type Vec3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraModel {
    pub f_px: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraModel {
    /// Approximate intrinsics when no calibration is available: focal length
    /// equal to the image width, principal point at the centre.
    pub fn for_image(dims: ImageDims) -> Self {
        CameraModel {
            f_px: dims.w as f64,
            cx: dims.w as f64 / 2.0,
            cy: dims.h as f64 / 2.0,
        }
    }

    /// Parses a calibration document `{"f_px": .., "cx": .., "cy": ..}`.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cam: CameraModel = serde_json::from_str(text).map_err(|e| e.to_string())?;
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.f_px > 0.0 && self.f_px.is_finite()) {
            return Err("f_px must be > 0".into());
        }
        if !(self.cx.is_finite() && self.cy.is_finite()) {
            return Err("principal point must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreenGeometry {
    pub width_px: u32,
    pub height_px: u32,
    pub width_mm: f64,
    pub height_mm: f64,
    /// Camera position relative to the top-centre of the screen, in mm.
    pub camera_offset_mm: [f64; 2],
}

impl Default for ScreenGeometry {
    fn default() -> Self {
        ScreenGeometry {
            width_px: 1920,
            height_px: 1080,
            width_mm: 600.0,
            height_mm: 340.0,
            camera_offset_mm: [0.0, 0.0],
        }
    }
}

impl ScreenGeometry {
    pub fn validate(&self) -> Result<(), (String, String)> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err((
                "screen.width_px".into(),
                "pixel dimensions must be > 0".into(),
            ));
        }
        if !(self.width_mm > 0.0 && self.height_mm > 0.0) {
            return Err((
                "screen.width_mm".into(),
                "physical dimensions must be > 0".into(),
            ));
        }
        if !self.camera_offset_mm.iter().all(|v| v.is_finite()) {
            return Err(("screen.camera_offset_mm".into(), "must be finite".into()));
        }
        Ok(())
    }

    pub fn aspect(&self) -> f64 {
        self.width_px as f64 / self.height_px as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GazeConfig {
    pub iris_diameter_mm: f64,
    /// Depth used when no measurement is available.
    pub default_depth_mm: f64,
    /// Degrees of gaze rotation per unit of normalized iris displacement.
    pub iris_gain_deg: f64,
    pub smoothing: LowPassParams,
}

impl Default for GazeConfig {
    fn default() -> Self {
        GazeConfig {
            iris_diameter_mm: IRIS_DIAMETER_MM,
            default_depth_mm: 600.0,
            iris_gain_deg: 30.0,
            smoothing: LowPassParams::default(),
        }
    }
}

impl GazeConfig {
    pub fn validate(&self) -> Result<(), (String, String)> {
        if !(self.iris_diameter_mm > 0.0) {
            return Err(("gaze.iris_diameter_mm".into(), "must be > 0".into()));
        }
        if !(self.default_depth_mm > 0.0) {
            return Err(("gaze.default_depth_mm".into(), "must be > 0".into()));
        }
        if !self.iris_gain_deg.is_finite() {
            return Err(("gaze.iris_gain_deg".into(), "must be finite".into()));
        }
        self.smoothing
            .validate()
            .map_err(|m| ("gaze.smoothing".to_string(), m))
    }
}

/// Horizontal iris diameter: distance between boundary points 3 (left) and
/// 1 (right) of the 5-point block.
pub fn iris_diameter_px(iris: &[Point2; 5], dims: ImageDims) -> Result<f64, GestureError> {
    let d = to_pixels(&iris[3], dims).dist(to_pixels(&iris[1], dims));
    if d == 0.0 {
        return Err(GestureError::DegenerateIris);
    }
    Ok(d)
}

/// Pinhole inversion `Z = f * D / d`.
pub fn depth_from_iris(
    d_px: f64,
    camera: &CameraModel,
    iris_diameter_mm: f64,
) -> Result<f64, GestureError> {
    if !(d_px > 0.0) {
        return Err(GestureError::DegenerateIris);
    }
    Ok(camera.f_px * iris_diameter_mm / d_px)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DepthSource {
    Iris,
    PoseMetric,
    Palm,
    Default,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthEstimate {
    pub depth_mm: f64,
    pub source: DepthSource,
}

/// Fallback chain: iris, then metric nose depth, then calibrated palm size,
/// then the configured default.
pub fn resolve_depth(
    frame: &LandmarkFrame,
    camera: &CameraModel,
    palm_k_mm_px: Option<f64>,
    cfg: &GazeConfig,
) -> DepthEstimate {
    if let Some(face) = &frame.face {
        let depths: Vec<f64> = [face.iris_left.as_ref(), face.iris_right.as_ref()]
            .into_iter()
            .flatten()
            .filter_map(|iris| iris_diameter_px(iris, frame.image).ok())
            .filter_map(|d| depth_from_iris(d, camera, cfg.iris_diameter_mm).ok())
            .collect();
        if !depths.is_empty() {
            return DepthEstimate {
                depth_mm: depths.iter().sum::<f64>() / depths.len() as f64,
                source: DepthSource::Iris,
            };
        }
    }
    if let Some(mm) = frame.pose.as_ref().and_then(|p| p.metric_nose_depth_mm) {
        return DepthEstimate {
            depth_mm: mm,
            source: DepthSource::PoseMetric,
        };
    }
    if let Some(k) = palm_k_mm_px {
        let palm = HandModule::cursor_hand(&frame.hands)
            .and_then(|side| frame.hand(side))
            .and_then(|h| palm_size_px(h, frame.image).ok());
        if let Some(depth) = palm.and_then(|px| estimate_depth_from_palm(px, k).ok()) {
            return DepthEstimate {
                depth_mm: depth,
                source: DepthSource::Palm,
            };
        }
    }
    DepthEstimate {
        depth_mm: cfg.default_depth_mm,
        source: DepthSource::Default,
    }
}

/// Pixel `(u, v)` at depth `z_mm` to camera coordinates.
pub fn back_project(u: f64, v: f64, z_mm: f64, camera: &CameraModel) -> Vec3 {
    [
        (u - camera.cx) * z_mm / camera.f_px,
        (v - camera.cy) * z_mm / camera.f_px,
        z_mm,
    ]
}

/// Projects a camera-space point to pixels.
pub fn project(p: Vec3, camera: &CameraModel) -> (f64, f64) {
    (
        camera.cx + camera.f_px * p[0] / p[2],
        camera.cy + camera.f_px * p[1] / p[2],
    )
}

/// Gaze direction from head pose plus iris displacement. Offsets are in
/// half-eye-widths, positive toward image-right and image-down.
pub fn gaze_direction(pose: &HeadPose, iris_offset: (f64, f64), gain_deg: f64) -> Vec3 {
    let yaw = (pose.yaw + gain_deg * iris_offset.0).to_radians();
    let pitch = (pose.pitch - gain_deg * iris_offset.1).to_radians();
    let d = [
        yaw.sin() * pitch.cos(),
        -pitch.sin(),
        -yaw.cos() * pitch.cos(),
    ];
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    [d[0] / n, d[1] / n, d[2] / n]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GazeSample {
    pub eye_position_mm: Vec3,
    pub gaze_direction: Vec3,
    pub depth_source: DepthSource,
}

/// Intersects the gaze ray with the screen plane; `None` when the ray points
/// away from the screen or lands outside it.
pub fn screen_point(sample: &GazeSample, screen: &ScreenGeometry) -> Option<(f64, f64)> {
    let e = sample.eye_position_mm;
    let g = sample.gaze_direction;
    if g[2] >= 0.0 {
        return None;
    }
    let t = -e[2] / g[2];
    if t <= 0.0 {
        return None;
    }
    let x_mm = e[0] + t * g[0] + screen.camera_offset_mm[0];
    let y_mm = e[1] + t * g[1] + screen.camera_offset_mm[1];
    let sx = screen.width_px as f64 / 2.0 + x_mm * screen.width_px as f64 / screen.width_mm;
    let sy = y_mm * screen.height_px as f64 / screen.height_mm;
    let inside =
        (0.0..screen.width_px as f64).contains(&sx) && (0.0..screen.height_px as f64).contains(&sy);
    inside.then_some((sx, sy))
}

/// Mean iris displacement from the eye-corner midpoint, in half-eye-widths,
/// over the eyes that carry an iris block.
pub fn iris_offsets(face: &FaceFrame, dims: ImageDims) -> (f64, f64) {
    let pts: Vec<Point2> = face.points68.iter().map(|p| to_pixels(p, dims)).collect();
    let eyes = [
        (face.iris_left.as_ref(), LEFT_EYE[0], LEFT_EYE[3]),
        (face.iris_right.as_ref(), RIGHT_EYE[0], RIGHT_EYE[3]),
    ];
    let mut sum = (0.0, 0.0);
    let mut n = 0.0;
    for (iris, a, b) in eyes {
        let Some(iris) = iris else { continue };
        let half = pts[a].dist(pts[b]) / 2.0;
        if half == 0.0 {
            continue;
        }
        let mid = pts[a].midpoint(pts[b]);
        let c = to_pixels(&iris[0], dims);
        sum.0 += (c.x - mid.x) / half;
        sum.1 += (c.y - mid.y) / half;
        n += 1.0;
    }
    if n == 0.0 {
        (0.0, 0.0)
    } else {
        (sum.0 / n, sum.1 / n)
    }
}

/// Pixel position of the point between the eyes: iris centres when present,
/// eye-landmark centroids otherwise.
pub fn eye_center_px(face: &FaceFrame, dims: ImageDims) -> Point2 {
    let pts: Vec<Point2> = face.points68.iter().map(|p| to_pixels(p, dims)).collect();
    let left = face
        .iris_left
        .map(|i| to_pixels(&i[0], dims))
        .unwrap_or_else(|| centroid(&LEFT_EYE.map(|i| pts[i])));
    let right = face
        .iris_right
        .map(|i| to_pixels(&i[0], dims))
        .unwrap_or_else(|| centroid(&RIGHT_EYE.map(|i| pts[i])));
    left.midpoint(right)
}

pub fn gaze_sample(
    face: &FaceFrame,
    dims: ImageDims,
    depth: DepthEstimate,
    camera: &CameraModel,
    cfg: &GazeConfig,
    pitch_ref_ratio: f64,
) -> Result<GazeSample, GestureError> {
    let pts: Vec<Point2> = face.points68.iter().map(|p| to_pixels(p, dims)).collect();
    let pose = head_pose_px(&pts, pitch_ref_ratio)?;
    let eye = eye_center_px(face, dims);
    Ok(GazeSample {
        eye_position_mm: back_project(eye.x, eye.y, depth.depth_mm, camera),
        gaze_direction: gaze_direction(&pose, iris_offsets(face, dims), cfg.iris_gain_deg),
        depth_source: depth.source,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GazeTelemetry {
    pub depth_mm: Option<f64>,
    pub depth_source: Option<DepthSource>,
    pub screen_point: Option<(f64, f64)>,
}

/// Gaze-driven cursor.
#[derive(Debug, Clone)]
pub struct GazeModule {
    cfg: GazeConfig,
    filter: LowPass2,
    last_cursor: Option<(f64, f64)>,
    last_t_ms: Option<f64>,
    telemetry: GazeTelemetry,
}

impl GazeModule {
    pub fn new(cfg: GazeConfig) -> Self {
        GazeModule {
            filter: LowPass2::new(cfg.smoothing),
            cfg,
            last_cursor: None,
            last_t_ms: None,
            telemetry: GazeTelemetry::default(),
        }
    }

    pub fn telemetry(&self) -> GazeTelemetry {
        self.telemetry
    }

    #[allow(clippy::too_many_arguments)]
    pub fn step(
        &mut self,
        face: Option<&FaceFrame>,
        dims: ImageDims,
        depth: DepthEstimate,
        camera: &CameraModel,
        screen: &ScreenGeometry,
        pitch_ref_ratio: f64,
        t_ms: f64,
    ) -> Result<Vec<GestureEvent>, GestureError> {
        if let Some(prev) = self.last_t_ms {
            if t_ms < prev {
                return Err(GestureError::NonMonotonicTime {
                    prev_ms: prev,
                    t_ms,
                });
            }
            if t_ms == prev {
                return Ok(Vec::new());
            }
        }
        self.last_t_ms = Some(t_ms);
        self.telemetry = GazeTelemetry {
            depth_mm: Some(depth.depth_mm),
            depth_source: Some(depth.source),
            screen_point: None,
        };

        let Some(face) = face else {
            self.filter.reset();
            self.last_cursor = None;
            return Ok(Vec::new());
        };
        let Ok(sample) = gaze_sample(face, dims, depth, camera, &self.cfg, pitch_ref_ratio) else {
            return Ok(Vec::new());
        };
        let Some((sx, sy)) = screen_point(&sample, screen) else {
            return Ok(Vec::new());
        };
        let (w, h) = (screen.width_px as f64, screen.height_px as f64);
        let (nx, ny) = self.filter.step(sx / w, sy / h, t_ms)?;
        let x = (nx * w).clamp(0.0, w - 1.0);
        let y = (ny * h).clamp(0.0, h - 1.0);
        self.telemetry.screen_point = Some((x, y));
        let (dx, dy) = self
            .last_cursor
            .map_or((0.0, 0.0), |(px, py)| (x - px, y - py));
        self.last_cursor = Some((x, y));
        Ok(vec![GestureEvent::new(
            t_ms,
            ModuleId::Gaze,
            GestureKind::CursorMove { x, y, dx, dy },
        )])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iris_block(left_x: f64, right_x: f64, y: f64) -> [Point2; 5] {
        let cx = (left_x + right_x) / 2.0;
        [
            Point2::new(cx, y),
            Point2::new(right_x, y),
            Point2::new(cx, y - 0.01),
            Point2::new(left_x, y),
            Point2::new(cx, y + 0.01),
        ]
    }

    #[test]
    fn iris_diameter_horizontal_only() {
        let dims = ImageDims::new(1000, 800);
        let mut iris = iris_block(0.48, 0.50, 0.5);
        assert!((iris_diameter_px(&iris, dims).unwrap() - 20.0).abs() < 1e-9);
        iris[2].y = 0.1;
        iris[4].y = 0.9;
        assert!((iris_diameter_px(&iris, dims).unwrap() - 20.0).abs() < 1e-9);
        let flat = [Point2::new(0.5, 0.5); 5];
        assert_eq!(
            iris_diameter_px(&flat, dims),
            Err(GestureError::DegenerateIris)
        );
    }

    #[test]
    fn pinhole_depth_values() {
        let cam = CameraModel {
            f_px: 1000.0,
            cx: 320.0,
            cy: 240.0,
        };
        // synthesized d = f * D / Z at Z = 500
        let d = 1000.0 * IRIS_DIAMETER_MM / 500.0;
        assert!((depth_from_iris(d, &cam, IRIS_DIAMETER_MM).unwrap() - 500.0).abs() < 1e-9);
        assert!((depth_from_iris(23.4, &cam, IRIS_DIAMETER_MM).unwrap() - 500.0).abs() < 1e-9);
        assert!((depth_from_iris(46.8, &cam, IRIS_DIAMETER_MM).unwrap() - 250.0).abs() < 1e-9);
        let cam600 = CameraModel { f_px: 600.0, ..cam };
        assert!((depth_from_iris(11.7, &cam600, IRIS_DIAMETER_MM).unwrap() - 600.0).abs() < 1e-9);
        assert!(depth_from_iris(0.0, &cam, IRIS_DIAMETER_MM).is_err());
    }

    #[test]
    fn back_projection() {
        let cam = CameraModel {
            f_px: 1000.0,
            cx: 320.0,
            cy: 240.0,
        };
        assert_eq!(back_project(320.0, 240.0, 777.0, &cam), [0.0, 0.0, 777.0]);
        assert!((back_project(420.0, 240.0, 500.0, &cam)[0] - 50.0).abs() < 1e-12);
        assert!((back_project(520.0, 240.0, 500.0, &cam)[0] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn gaze_direction_cases() {
        let d = gaze_direction(&HeadPose::default(), (0.0, 0.0), 30.0);
        assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12 && (d[2] + 1.0).abs() < 1e-12);
        let side = gaze_direction(
            &HeadPose {
                yaw: 90.0,
                pitch: 0.0,
                roll: 0.0,
            },
            (0.0, 0.0),
            30.0,
        );
        assert!((side[0] - 1.0).abs() < 1e-9 && side[1].abs() < 1e-9 && side[2].abs() < 1e-9);
        let thirty = gaze_direction(
            &HeadPose {
                yaw: 30.0,
                pitch: 0.0,
                roll: 0.0,
            },
            (0.0, 0.0),
            30.0,
        );
        assert!((thirty[0] - 0.5).abs() < 1e-6 && (thirty[2] + 0.866_025).abs() < 1e-6);
        // iris offset adds to head yaw
        let mixed = gaze_direction(
            &HeadPose {
                yaw: 10.0,
                pitch: 0.0,
                roll: 0.0,
            },
            (0.5, 0.0),
            40.0,
        );
        assert!((mixed[0] - 30f64.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn screen_intersections() {
        let screen = ScreenGeometry {
            width_px: 1920,
            height_px: 1080,
            width_mm: 600.0,
            height_mm: 340.0,
            camera_offset_mm: [0.0, 0.0],
        };
        let straight = GazeSample {
            eye_position_mm: [0.0, 0.0, 500.0],
            gaze_direction: [0.0, 0.0, -1.0],
            depth_source: DepthSource::Default,
        };
        assert_eq!(screen_point(&straight, &screen), Some((960.0, 0.0)));

        let n = (170.0f64.powi(2) + 500.0f64.powi(2)).sqrt();
        let down = GazeSample {
            gaze_direction: [0.0, 170.0 / n, -500.0 / n],
            ..straight
        };
        let (sx, sy) = screen_point(&down, &screen).unwrap();
        assert!((sx - 960.0).abs() < 1e-9 && (sy - 540.0).abs() < 1e-9);

        let up = GazeSample {
            gaze_direction: [0.0, -0.6, -0.8],
            ..straight
        };
        assert_eq!(screen_point(&up, &screen), None);
        let away = GazeSample {
            gaze_direction: [0.0, 0.0, 1.0],
            ..straight
        };
        assert_eq!(screen_point(&away, &screen), None);
    }

    #[test]
    fn camera_file_parsing() {
        let cam = CameraModel::from_json(r#"{"f_px": 900.5, "cx": 320, "cy": 240}"#).unwrap();
        assert_eq!(cam.f_px, 900.5);
        assert!(CameraModel::from_json(r#"{"f_px": -1, "cx": 0, "cy": 0}"#).is_err());
    }
}
