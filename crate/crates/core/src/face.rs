//! Face and head triggers over the 68-point face topology: eye and mouth
//! aspect ratios, blink/wink and mouth open/close detection, geometric head
//! pose, profile clicks, and a head-driven joystick cursor or scroll.
//!
//! "Left" and "right" follow the image: the left eye is the one drawn on the
//! image-left side (points 36-41). Head yaw is positive when the nose tip
//! moves toward image-right, pitch is positive looking up, and roll is
//! positive when the eye line turns clockwise on screen.

use serde::{Deserialize, Serialize};

use crate::error::GestureError;
use crate::event::{GestureEvent, GestureKind, ModuleId};
use crate::geometry::{centroid, rotate};
use crate::model::{to_pixels, FaceFrame, ImageDims, Point2};
use crate::signal::{Debounce, HysteresisState, LowPassParams, LowPassState};

pub const LEFT_EYE: [usize; 6] = [36, 37, 38, 39, 40, 41];
pub const RIGHT_EYE: [usize; 6] = [42, 43, 44, 45, 46, 47];
pub const INNER_MOUTH: [usize; 8] = [60, 61, 62, 63, 64, 65, 66, 67];
pub const JAW_START: usize = 0;
pub const JAW_END: usize = 16;
pub const CHIN: usize = 8;
pub const NOSE_TIP: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    /// Facial triggers only.
    Triggers,
    /// Head rotation steers the cursor like a joystick.
    Cursor,
    /// Pitch beyond a threshold scrolls.
    Scroll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeadConfig {
    pub mode: HeadMode,
    pub ear_on: f64,
    pub ear_off: f64,
    pub mar_on: f64,
    pub mar_off: f64,
    pub blink_frames: u32,
    pub wink_frames: u32,
    pub profile_on_deg: f64,
    pub profile_off_deg: f64,
    pub profile_hold_ms: f64,
    /// Nose-tip position between eye line and chin on a level head.
    pub pitch_ref_ratio: f64,
    pub deadzone_deg: f64,
    /// Cursor speed in px/s per degree beyond the deadzone.
    pub cursor_gain: f64,
    pub scroll_threshold_deg: f64,
    /// Wheel ticks per second while the head is tilted past the threshold.
    pub scroll_rate: f64,
    pub smoothing: LowPassParams,
}

impl Default for HeadConfig {
    fn default() -> Self {
        HeadConfig {
            mode: HeadMode::Triggers,
            ear_on: 0.20,
            ear_off: 0.25,
            mar_on: 0.55,
            mar_off: 0.45,
            blink_frames: 2,
            wink_frames: 3,
            profile_on_deg: 25.0,
            profile_off_deg: 20.0,
            profile_hold_ms: 200.0,
            pitch_ref_ratio: 0.45,
            deadzone_deg: 5.0,
            cursor_gain: 40.0,
            scroll_threshold_deg: 10.0,
            scroll_rate: 5.0,
            smoothing: LowPassParams::default(),
        }
    }
}

impl HeadConfig {
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |f: &str, m: &str| Err((format!("head.{f}"), m.to_string()));
        if !(self.ear_on > 0.0 && self.ear_on < self.ear_off) {
            return err("ear_on", "must be > 0 and below head.ear_off");
        }
        if !(self.mar_off > 0.0 && self.mar_off < self.mar_on) {
            return err("mar_on", "must be above head.mar_off > 0");
        }
        if self.blink_frames == 0 || self.wink_frames == 0 {
            return err("blink_frames", "frame counts must be >= 1");
        }
        if !(self.profile_off_deg > 0.0
            && self.profile_off_deg < self.profile_on_deg
            && self.profile_on_deg < 90.0)
        {
            return err(
                "profile_on_deg",
                "need 0 < profile_off_deg < profile_on_deg < 90",
            );
        }
        if !(self.profile_hold_ms >= 0.0) {
            return err("profile_hold_ms", "must be >= 0");
        }
        if !(self.pitch_ref_ratio > 0.0 && self.pitch_ref_ratio < 1.0) {
            return err("pitch_ref_ratio", "must be in (0, 1)");
        }
        if !(self.deadzone_deg >= 0.0 && self.cursor_gain >= 0.0) {
            return err("deadzone_deg", "deadzone_deg and cursor_gain must be >= 0");
        }
        if !(self.scroll_threshold_deg >= 0.0 && self.scroll_rate >= 0.0) {
            return err("scroll_threshold_deg", "scroll settings must be >= 0");
        }
        if let Err(m) = self.smoothing.validate() {
            return err("smoothing", &m);
        }
        Ok(())
    }
}

/// Six eye points in pixel space: outer corner, two upper-lid points, inner
/// corner, two lower-lid points (p1..p6).
pub fn eye_aspect_ratio(eye: &[Point2; 6]) -> Result<f64, GestureError> {
    let [p1, p2, p3, p4, p5, p6] = *eye;
    let span = p1.dist(p4);
    if span == 0.0 {
        return Err(GestureError::DegenerateEye);
    }
    Ok((p2.dist(p6) + p3.dist(p5)) / (2.0 * span))
}

/// Inner-mouth points 60..67 in pixel space.
pub fn mouth_aspect_ratio(mouth: &[Point2; 8]) -> Result<f64, GestureError> {
    let [p60, p61, p62, p63, p64, p65, p66, p67] = *mouth;
    let width = p60.dist(p64);
    if width == 0.0 {
        return Err(GestureError::DegenerateMouth);
    }
    Ok((p61.dist(p67) + p62.dist(p66) + p63.dist(p65)) / (3.0 * width))
}

fn pick<const N: usize>(pts: &[Point2], idx: [usize; N]) -> [Point2; N] {
    idx.map(|i| pts[i])
}

pub fn face_pixels(face: &FaceFrame, dims: ImageDims) -> Vec<Point2> {
    face.points68.iter().map(|p| to_pixels(p, dims)).collect()
}

/// Left and right eye aspect ratios of a face.
pub fn face_ears(face: &FaceFrame, dims: ImageDims) -> Result<(f64, f64), GestureError> {
    let pts = face_pixels(face, dims);
    Ok((
        eye_aspect_ratio(&pick(&pts, LEFT_EYE))?,
        eye_aspect_ratio(&pick(&pts, RIGHT_EYE))?,
    ))
}

pub fn face_mar(face: &FaceFrame, dims: ImageDims) -> Result<f64, GestureError> {
    mouth_aspect_ratio(&pick(&face_pixels(face, dims), INNER_MOUTH))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HeadPose {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

/// Geometric head pose from 68 landmarks, in degrees.
pub fn head_pose(
    face: &FaceFrame,
    dims: ImageDims,
    pitch_ref_ratio: f64,
) -> Result<HeadPose, GestureError> {
    let pts = face_pixels(face, dims);
    head_pose_px(&pts, pitch_ref_ratio)
}

pub fn head_pose_px(pts: &[Point2], pitch_ref_ratio: f64) -> Result<HeadPose, GestureError> {
    let left = centroid(&pick(pts, LEFT_EYE));
    let right = centroid(&pick(pts, RIGHT_EYE));
    let d = right - left;
    let mut roll = d.y.atan2(d.x).to_degrees();
    // the eye line is undirected
    if roll > 90.0 {
        roll -= 180.0;
    } else if roll < -90.0 {
        roll += 180.0;
    }

    let jaw_width = pts[JAW_START].dist(pts[JAW_END]);
    if jaw_width == 0.0 {
        return Err(GestureError::DegenerateFace("zero jaw width"));
    }
    let eye_mid = left.midpoint(right);
    let level = |i: usize| rotate(pts[i], eye_mid, -roll);
    let (j0, j16, nose, chin) = (
        level(JAW_START),
        level(JAW_END),
        level(NOSE_TIP),
        level(CHIN),
    );

    let jaw_mid_x = (j0.x + j16.x) / 2.0;
    let yaw = (2.0 * (nose.x - jaw_mid_x) / jaw_width)
        .clamp(-1.0, 1.0)
        .asin()
        .to_degrees();

    let eye_to_chin = chin.y - eye_mid.y;
    if eye_to_chin == 0.0 {
        return Err(GestureError::DegenerateFace("zero eye-to-chin distance"));
    }
    let ratio = (nose.y - eye_mid.y) / eye_to_chin;
    let pitch = ((pitch_ref_ratio - ratio) / pitch_ref_ratio)
        .clamp(-1.0, 1.0)
        .asin()
        .to_degrees();

    Ok(HeadPose {
        yaw: yaw.clamp(-90.0, 90.0),
        pitch: pitch.clamp(-90.0, 90.0),
        roll: roll.clamp(-90.0, 90.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileClass {
    Frontal,
    LeftProfile,
    RightProfile,
}

/// Profile classification with a re-entry band: leaving a profile requires
/// |yaw| to drop below `off_deg`, entering one requires exceeding `on_deg`.
pub fn profile_class(
    yaw: Option<f64>,
    previous: ProfileClass,
    on_deg: f64,
    off_deg: f64,
) -> ProfileClass {
    let Some(yaw) = yaw else {
        return ProfileClass::Frontal;
    };
    match previous {
        _ if yaw > on_deg => ProfileClass::RightProfile,
        _ if yaw < -on_deg => ProfileClass::LeftProfile,
        ProfileClass::RightProfile if yaw >= off_deg => ProfileClass::RightProfile,
        ProfileClass::LeftProfile if yaw <= -off_deg => ProfileClass::LeftProfile,
        _ => ProfileClass::Frontal,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Closure {
    active: bool,
    both_run: u32,
    both_max: u32,
    left_only: u32,
    right_only: u32,
    left_dipped: bool,
    right_dipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HeadTelemetry {
    pub ear_left: Option<f64>,
    pub ear_right: Option<f64>,
    pub mar: Option<f64>,
    pub pose: Option<HeadPose>,
    pub neutral: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
pub struct HeadContext {
    pub image: ImageDims,
    pub screen_w: u32,
    pub screen_h: u32,
}

/// Per-user head module state.
#[derive(Debug, Clone)]
pub struct HeadState {
    cfg: HeadConfig,
    ear_left: HysteresisState,
    ear_right: HysteresisState,
    mouth: HysteresisState,
    closure: Closure,
    yaw: LowPassState,
    pitch: LowPassState,
    profile: Debounce<ProfileClass>,
    neutral: Option<(f64, f64)>,
    cursor: (f64, f64),
    last_face_t_ms: Option<f64>,
    last_t_ms: Option<f64>,
    telemetry: HeadTelemetry,
}

impl HeadState {
    pub fn new(cfg: HeadConfig, screen_w: u32, screen_h: u32) -> Result<Self, GestureError> {
        Ok(HeadState {
            ear_left: HysteresisState::below(cfg.ear_on, cfg.ear_off)?,
            ear_right: HysteresisState::below(cfg.ear_on, cfg.ear_off)?,
            mouth: HysteresisState::above(cfg.mar_on, cfg.mar_off)?,
            closure: Closure::default(),
            yaw: LowPassState::new(cfg.smoothing),
            pitch: LowPassState::new(cfg.smoothing),
            profile: Debounce::new(cfg.profile_hold_ms, ProfileClass::Frontal),
            neutral: None,
            cursor: (screen_w as f64 / 2.0, screen_h as f64 / 2.0),
            last_face_t_ms: None,
            last_t_ms: None,
            telemetry: HeadTelemetry::default(),
            cfg,
        })
    }

    pub fn telemetry(&self) -> HeadTelemetry {
        self.telemetry
    }

    pub fn neutral(&self) -> Option<(f64, f64)> {
        self.neutral
    }

    fn reset_on_absence(&mut self) {
        self.ear_left.reset();
        self.ear_right.reset();
        self.mouth.reset();
        self.closure = Closure::default();
        self.yaw.reset();
        self.pitch.reset();
        self.last_face_t_ms = None;
        self.telemetry = HeadTelemetry {
            neutral: self.neutral,
            ..HeadTelemetry::default()
        };
    }

    pub fn step(
        &mut self,
        face: Option<&FaceFrame>,
        ctx: HeadContext,
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

        // the profile debouncer keeps its own clock so it sees absence too
        let Some(face) = face else {
            self.profile.step(ProfileClass::Frontal, t_ms)?;
            self.reset_on_absence();
            return Ok(Vec::new());
        };

        let mut out = Vec::new();
        let emit = |out: &mut Vec<GestureEvent>, kind| {
            out.push(GestureEvent::new(t_ms, ModuleId::Head, kind))
        };

        let pts = face_pixels(face, ctx.image);
        let ears = eye_aspect_ratio(&pick(&pts, LEFT_EYE))
            .and_then(|l| Ok((l, eye_aspect_ratio(&pick(&pts, RIGHT_EYE))?)));
        if let Ok((ear_l, ear_r)) = ears {
            self.telemetry.ear_left = Some(ear_l);
            self.telemetry.ear_right = Some(ear_r);
            if let Some(kind) = self.track_closure(ear_l, ear_r) {
                emit(&mut out, kind);
            }
        }

        if let Ok(mar) = mouth_aspect_ratio(&pick(&pts, INNER_MOUTH)) {
            self.telemetry.mar = Some(mar);
            let was = self.mouth.is_active();
            let now = self.mouth.step(mar);
            if now != was {
                emit(
                    &mut out,
                    if now {
                        GestureKind::MouthOpen
                    } else {
                        GestureKind::MouthClose
                    },
                );
            }
        }

        let pose = head_pose_px(&pts, self.cfg.pitch_ref_ratio).ok();
        self.telemetry.pose = pose;

        let previous = self.profile.stable();
        let raw = profile_class(
            pose.map(|p| p.yaw),
            previous,
            self.cfg.profile_on_deg,
            self.cfg.profile_off_deg,
        );
        let stable = self.profile.step(raw, t_ms)?;
        if stable != previous {
            match stable {
                ProfileClass::LeftProfile => emit(&mut out, GestureKind::ProfileLeft),
                ProfileClass::RightProfile => emit(&mut out, GestureKind::ProfileRight),
                ProfileClass::Frontal => {}
            }
        }

        if let Some(pose) = pose {
            let yaw = self.yaw.step(pose.yaw, t_ms)?;
            let pitch = self.pitch.step(pose.pitch, t_ms)?;
            let (yaw0, pitch0) = *self.neutral.get_or_insert((yaw, pitch));
            self.telemetry.neutral = self.neutral;
            let dt_s = self
                .last_face_t_ms
                .map_or(0.0, |prev| (t_ms - prev) / 1000.0);
            match self.cfg.mode {
                HeadMode::Triggers => {}
                HeadMode::Cursor => {
                    let vx = self.cfg.cursor_gain * deadzone(yaw - yaw0, self.cfg.deadzone_deg);
                    let vy =
                        -self.cfg.cursor_gain * deadzone(pitch - pitch0, self.cfg.deadzone_deg);
                    if (vx != 0.0 || vy != 0.0) && dt_s > 0.0 {
                        let (px, py) = self.cursor;
                        let x = (px + vx * dt_s).clamp(0.0, (ctx.screen_w - 1) as f64);
                        let y = (py + vy * dt_s).clamp(0.0, (ctx.screen_h - 1) as f64);
                        self.cursor = (x, y);
                        emit(
                            &mut out,
                            GestureKind::CursorMove {
                                x,
                                y,
                                dx: x - px,
                                dy: y - py,
                            },
                        );
                    }
                }
                HeadMode::Scroll => {
                    let tilt = pitch - pitch0;
                    if tilt.abs() > self.cfg.scroll_threshold_deg && dt_s > 0.0 {
                        emit(
                            &mut out,
                            GestureKind::Scroll {
                                delta: tilt.signum() * self.cfg.scroll_rate * dt_s,
                            },
                        );
                    }
                }
            }
        }
        self.last_face_t_ms = Some(t_ms);
        Ok(out)
    }

    /// Blink/wink episode tracking. An episode starts when either eye closes
    /// and is classified when both eyes are open again.
    fn track_closure(&mut self, ear_l: f64, ear_r: f64) -> Option<GestureKind> {
        let closed_l = self.ear_left.step(ear_l);
        let closed_r = self.ear_right.step(ear_r);
        let off = self.cfg.ear_off;
        let c = &mut self.closure;

        if closed_l || closed_r {
            c.active = true;
            if closed_l && closed_r {
                c.both_run += 1;
                c.both_max = c.both_max.max(c.both_run);
            } else {
                c.both_run = 0;
            }
            c.left_dipped |= ear_l <= off;
            c.right_dipped |= ear_r <= off;
            if closed_l && !closed_r && ear_r > off {
                c.left_only += 1;
            }
            if closed_r && !closed_l && ear_l > off {
                c.right_only += 1;
            }
            return None;
        }
        if !c.active {
            return None;
        }
        let ended = std::mem::take(c);
        if ended.both_max >= self.cfg.blink_frames {
            Some(GestureKind::Blink)
        } else if ended.left_only >= self.cfg.wink_frames && !ended.right_dipped {
            Some(GestureKind::WinkLeft)
        } else if ended.right_only >= self.cfg.wink_frames && !ended.left_dipped {
            Some(GestureKind::WinkRight)
        } else {
            None
        }
    }
}

fn deadzone(v: f64, dz: f64) -> f64 {
    v.signum() * (v.abs() - dz).max(0.0)
}
