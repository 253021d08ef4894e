//! Hand gestures: idle/active state, palm-size depth, the Dynamic Area of
//! Interest (DAoI) cursor mapping, pinch click, finger-state poses and
//! fist-drag scrolling.
//!
//! All distances and angles are measured in pixel space. When two hands are
//! visible the right hand drives the cursor and the left hand only reports
//! pose changes; a lone hand of either side drives the cursor.

use serde::{Deserialize, Serialize};

use crate::error::GestureError;
use crate::event::{GestureEvent, GestureKind, ModuleId};
use crate::geometry::angle_deg;
use crate::model::{hand_idx as idx, to_pixels, HandFrame, Handedness, ImageDims, Point2};
use crate::signal::{Debounce, HysteresisState, LowPass2, LowPassParams, LowPassState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandConfig {
    pub pinch_on: f64,
    pub pinch_off: f64,
    pub idle_hold_ms: f64,
    pub extended_deg: f64,
    pub bent_deg: f64,
    /// DAoI width as a multiple of the palm size.
    pub c_scale: f64,
    pub smoothing: LowPassParams,
    /// Wheel ticks per palm length of fist travel.
    pub scroll_gain: f64,
    /// Minimum fist speed, in palm lengths per second, that scrolls.
    pub scroll_deadzone: f64,
    /// Palm-depth calibration constant (mm * px); depth = k / palm_px.
    pub depth_k_mm_px: Option<f64>,
}

impl Default for HandConfig {
    fn default() -> Self {
        HandConfig {
            pinch_on: 0.35,
            pinch_off: 0.45,
            idle_hold_ms: 300.0,
            extended_deg: 160.0,
            bent_deg: 130.0,
            c_scale: 3.0,
            smoothing: LowPassParams::default(),
            scroll_gain: 3.0,
            scroll_deadzone: 0.3,
            depth_k_mm_px: None,
        }
    }
}

impl HandConfig {
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |f: &str, m: &str| Err((format!("hand.{f}"), m.to_string()));
        if !(self.pinch_on > 0.0 && self.pinch_on < self.pinch_off) {
            return err("pinch_on", "must be > 0 and below hand.pinch_off");
        }
        if !(self.idle_hold_ms >= 0.0) {
            return err("idle_hold_ms", "must be >= 0");
        }
        if !(self.bent_deg > 0.0 && self.bent_deg < self.extended_deg && self.extended_deg <= 180.0)
        {
            return err("bent_deg", "need 0 < bent_deg < extended_deg <= 180");
        }
        if !(self.c_scale > 0.0) {
            return err("c_scale", "must be > 0");
        }
        if let Err(m) = self.smoothing.validate() {
            return err("smoothing", &m);
        }
        if !(self.scroll_gain >= 0.0 && self.scroll_deadzone >= 0.0) {
            return err(
                "scroll_gain",
                "scroll_gain and scroll_deadzone must be >= 0",
            );
        }
        if let Some(k) = self.depth_k_mm_px {
            if !(k > 0.0) {
                return err("depth_k_mm_px", "must be > 0");
            }
        }
        Ok(())
    }
}

fn px(hand: &HandFrame, i: usize, dims: ImageDims) -> Point2 {
    to_pixels(&hand.points[i], dims).xy()
}

/// Wrist to middle-finger MCP distance in pixels.
pub fn palm_size_px(hand: &HandFrame, dims: ImageDims) -> Result<f64, GestureError> {
    let d = px(hand, idx::WRIST, dims).dist(px(hand, idx::MIDDLE_MCP, dims));
    if d == 0.0 {
        return Err(GestureError::DegenerateHand(
            "wrist and middle MCP coincide",
        ));
    }
    Ok(d)
}

/// Inverse-size pinhole law: `depth = k / palm_px`.
pub fn estimate_depth_from_palm(palm_px: f64, k_mm_px: f64) -> Result<f64, GestureError> {
    if !(palm_px > 0.0) {
        return Err(GestureError::DegenerateHand("palm size must be positive"));
    }
    Ok(k_mm_px / palm_px)
}

/// One-point calibration: the palm spans `palm_px` at `known_depth_mm`.
pub fn calibrate_palm(known_depth_mm: f64, palm_px: f64) -> f64 {
    known_depth_mm * palm_px
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PalmFacing {
    TowardCamera,
    Away,
}

pub fn palm_facing(hand: &HandFrame, dims: ImageDims) -> Result<PalmFacing, GestureError> {
    let wrist = px(hand, idx::WRIST, dims);
    let a = px(hand, idx::INDEX_MCP, dims) - wrist;
    let b = px(hand, idx::PINKY_MCP, dims) - wrist;
    let cross_z = a.x * b.y - a.y * b.x;
    if cross_z == 0.0 {
        return Err(GestureError::DegenerateHand("palm triangle is degenerate"));
    }
    let toward = match hand.handedness {
        Handedness::Right => cross_z > 0.0,
        Handedness::Left => cross_z < 0.0,
    };
    Ok(if toward {
        PalmFacing::TowardCamera
    } else {
        PalmFacing::Away
    })
}

/// Raw (undebounced) idle test: hand absent, palm turned away, or index tip
/// resting below the thumb tip.
pub fn is_idle(hand: Option<&HandFrame>, dims: ImageDims) -> bool {
    let Some(hand) = hand else {
        return true;
    };
    match palm_facing(hand, dims) {
        Ok(PalmFacing::TowardCamera) => {}
        Ok(PalmFacing::Away) | Err(_) => return true,
    }
    hand.points[idx::INDEX_TIP].y > hand.points[idx::THUMB_TIP].y
}

/// DAoI rectangle in normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Daoi {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
}

impl Daoi {
    pub fn left(&self) -> f64 {
        self.cx - self.width / 2.0
    }

    pub fn top(&self) -> f64 {
        self.cy - self.height / 2.0
    }

    pub fn right(&self) -> f64 {
        self.cx + self.width / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.cy + self.height / 2.0
    }

    /// Builds a rectangle of the given size around `center`, shrunk
    /// uniformly if it exceeds the unit square and then translated inside it.
    pub fn fitted(center: Point2, width: f64, height: f64) -> Daoi {
        let shrink = 1.0f64.min(1.0 / width).min(1.0 / height);
        let (w, h) = (width * shrink, height * shrink);
        let cx = center.x.clamp(w / 2.0, 1.0 - w / 2.0);
        let cy = center.y.clamp(h / 2.0, 1.0 - h / 2.0);
        Daoi {
            cx,
            cy,
            width: w,
            height: h,
        }
    }

    /// Inverse of [`map_to_screen`] for unclamped points.
    pub fn from_screen(&self, sx: f64, sy: f64, screen_w: f64, screen_h: f64) -> Point2 {
        Point2::new(
            self.left() + sx / screen_w * self.width,
            self.top() + sy / screen_h * self.height,
        )
    }
}

/// DAoI size for a palm of `palm_px` pixels: width grows linearly with the
/// palm and height follows the screen aspect ratio.
pub fn daoi_rect(
    anchor: Point2,
    palm_px: f64,
    image_w: u32,
    c_scale: f64,
    screen_aspect: f64,
) -> Daoi {
    let width = c_scale * palm_px / image_w as f64;
    Daoi::fitted(anchor, width, width / screen_aspect)
}

/// Affine map from the DAoI to screen pixels, clamped to the screen.
pub fn map_to_screen(p: Point2, daoi: &Daoi, screen_w: u32, screen_h: u32) -> (f64, f64) {
    let u = (p.x - daoi.left()) / daoi.width;
    let v = (p.y - daoi.top()) / daoi.height;
    let sx = (u * screen_w as f64).clamp(0.0, (screen_w - 1) as f64);
    let sy = (v * screen_h as f64).clamp(0.0, (screen_h - 1) as f64);
    (sx, sy)
}

/// Thumb-tip to index-tip distance in palm lengths.
pub fn pinch_ratio(hand: &HandFrame, dims: ImageDims) -> Result<f64, GestureError> {
    let palm = palm_size_px(hand, dims)?;
    Ok(px(hand, idx::THUMB_TIP, dims).dist(px(hand, idx::INDEX_TIP, dims)) / palm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FingerState {
    Extended,
    Bent,
    Indeterminate,
}

/// Thumb, index, middle, ring, pinky.
pub type FingerStates = [FingerState; 5];

const FINGER_CHAINS: [(usize, usize, usize); 5] = [
    (idx::THUMB_MCP, idx::THUMB_IP, idx::THUMB_TIP),
    (idx::INDEX_MCP, idx::INDEX_PIP, idx::INDEX_TIP),
    (idx::MIDDLE_MCP, idx::MIDDLE_PIP, idx::MIDDLE_TIP),
    (idx::RING_MCP, idx::RING_PIP, idx::RING_TIP),
    (idx::PINKY_MCP, idx::PINKY_PIP, idx::PINKY_TIP),
];

pub fn classify_angle(angle: f64, extended_deg: f64, bent_deg: f64) -> FingerState {
    if angle >= extended_deg {
        FingerState::Extended
    } else if angle <= bent_deg {
        FingerState::Bent
    } else {
        FingerState::Indeterminate
    }
}

pub fn finger_angles(hand: &HandFrame, dims: ImageDims) -> Result<[f64; 5], GestureError> {
    let mut out = [0.0; 5];
    for (slot, &(a, b, c)) in out.iter_mut().zip(FINGER_CHAINS.iter()) {
        *slot = angle_deg(px(hand, a, dims), px(hand, b, dims), px(hand, c, dims))
            .ok_or(GestureError::DegenerateHand("zero-length finger segment"))?;
    }
    Ok(out)
}

pub fn finger_states(
    hand: &HandFrame,
    dims: ImageDims,
    extended_deg: f64,
    bent_deg: f64,
) -> Result<FingerStates, GestureError> {
    let angles = finger_angles(hand, dims)?;
    Ok(angles.map(|a| classify_angle(a, extended_deg, bent_deg)))
}

/// Named hand poses reported through `PoseChanged`.
pub fn pose_label(states: &FingerStates) -> &'static str {
    use FingerState::{Bent, Extended};
    let [thumb, index, middle, ring, pinky] = *states;
    let fingers = [index, middle, ring, pinky];
    if fingers.iter().all(|&f| f == Bent) {
        "fist"
    } else if thumb == Extended && fingers.iter().all(|&f| f == Extended) {
        "open_palm"
    } else if index == Extended && [middle, ring, pinky].iter().all(|&f| f == Bent) {
        "point"
    } else if index == Extended && middle == Extended && ring == Bent && pinky == Bent {
        "victory"
    } else {
        "other"
    }
}

fn is_fist(states: &FingerStates) -> bool {
    states[1..].iter().all(|&f| f == FingerState::Bent)
}

/// Per-hand tracking state.
#[derive(Debug, Clone)]
pub struct HandTrackState {
    handedness: Handedness,
    cursor: LowPass2,
    palm: LowPassState,
    scroll_y: LowPassState,
    pinch: HysteresisState,
    idle: Debounce<bool>,
    announced_idle: Option<bool>,
    anchor: Option<Point2>,
    daoi: Option<Daoi>,
    pose: Option<&'static str>,
    last_cursor: Option<(f64, f64)>,
    fist_prev_y: Option<f64>,
    scroll_t_ms: Option<f64>,
    had_cursor_role: bool,
    pinch_ratio: Option<f64>,
}

impl HandTrackState {
    pub fn new(handedness: Handedness, cfg: &HandConfig) -> Result<Self, GestureError> {
        Ok(HandTrackState {
            handedness,
            cursor: LowPass2::new(cfg.smoothing),
            palm: LowPassState::new(LowPassParams {
                fc_min: cfg.smoothing.fc_min,
                beta: 0.0,
                d_cutoff: cfg.smoothing.d_cutoff,
            }),
            scroll_y: LowPassState::new(cfg.smoothing),
            pinch: HysteresisState::below(cfg.pinch_on, cfg.pinch_off)?,
            idle: Debounce::new(cfg.idle_hold_ms, true),
            announced_idle: None,
            anchor: None,
            daoi: None,
            pose: None,
            last_cursor: None,
            fist_prev_y: None,
            scroll_t_ms: None,
            had_cursor_role: false,
            pinch_ratio: None,
        })
    }

    /// Debounced idle state; unsettled hands count as idle.
    pub fn is_idle(&self) -> bool {
        self.announced_idle != Some(false)
    }

    pub fn daoi(&self) -> Option<Daoi> {
        self.daoi
    }

    pub fn pinch_ratio(&self) -> Option<f64> {
        self.pinch_ratio
    }

    pub fn pose(&self) -> Option<&'static str> {
        self.pose
    }

    fn release_pinch(&mut self, t_ms: f64, out: &mut Vec<GestureEvent>) {
        if self.pinch.is_active() {
            self.pinch.reset();
            out.push(GestureEvent::new(
                t_ms,
                ModuleId::Hand,
                GestureKind::PinchRelease,
            ));
        }
    }

    fn leave_cursor_role(&mut self) {
        self.cursor.reset();
        self.palm.reset();
        self.scroll_y.reset();
        self.fist_prev_y = None;
        self.scroll_t_ms = None;
        self.last_cursor = None;
    }

    fn enter_idle(&mut self) {
        self.leave_cursor_role();
        self.anchor = None;
        self.daoi = None;
        self.pose = None;
        self.pinch_ratio = None;
    }
}

/// Frame context the hand module needs besides the hands themselves.
#[derive(Debug, Clone, Copy)]
pub struct HandContext {
    pub image: ImageDims,
    pub screen_w: u32,
    pub screen_h: u32,
}

/// The hand gesture module: two hand slots plus orchestration.
#[derive(Debug, Clone)]
pub struct HandModule {
    cfg: HandConfig,
    right: HandTrackState,
    left: HandTrackState,
    last_t_ms: Option<f64>,
}

impl HandModule {
    pub fn new(cfg: HandConfig) -> Result<Self, GestureError> {
        Ok(HandModule {
            right: HandTrackState::new(Handedness::Right, &cfg)?,
            left: HandTrackState::new(Handedness::Left, &cfg)?,
            cfg,
            last_t_ms: None,
        })
    }

    pub fn config(&self) -> &HandConfig {
        &self.cfg
    }

    pub fn slot(&self, handedness: Handedness) -> &HandTrackState {
        match handedness {
            Handedness::Right => &self.right,
            Handedness::Left => &self.left,
        }
    }

    /// Which hand drives the cursor this frame.
    pub fn cursor_hand(hands: &[HandFrame]) -> Option<Handedness> {
        if hands.iter().any(|h| h.handedness == Handedness::Right) {
            Some(Handedness::Right)
        } else {
            hands.first().map(|h| h.handedness)
        }
    }

    pub fn step(
        &mut self,
        hands: &[HandFrame],
        ctx: HandContext,
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

        let role = Self::cursor_hand(hands);
        let mut out = Vec::new();
        for side in [Handedness::Right, Handedness::Left] {
            let hand = hands.iter().find(|h| h.handedness == side);
            let slot = match side {
                Handedness::Right => &mut self.right,
                Handedness::Left => &mut self.left,
            };
            step_slot(
                slot,
                &self.cfg,
                hand,
                role == Some(side),
                ctx,
                t_ms,
                &mut out,
            )?;
        }
        Ok(out)
    }
}

fn step_slot(
    slot: &mut HandTrackState,
    cfg: &HandConfig,
    hand: Option<&HandFrame>,
    cursor_role: bool,
    ctx: HandContext,
    t_ms: f64,
    out: &mut Vec<GestureEvent>,
) -> Result<(), GestureError> {
    let raw_idle = is_idle(hand, ctx.image);
    let stable_idle = slot.idle.step(raw_idle, t_ms)?;
    let side = slot.handedness;

    if slot.idle.is_settled() && slot.announced_idle != Some(stable_idle) {
        slot.announced_idle = Some(stable_idle);
        if stable_idle {
            slot.release_pinch(t_ms, out);
            slot.enter_idle();
            slot.had_cursor_role = false;
            out.push(GestureEvent::new(
                t_ms,
                ModuleId::Hand,
                GestureKind::IdleEnter { hand: side },
            ));
        } else {
            slot.anchor = hand.map(|h| h.points[idx::WRIST].xy());
            out.push(GestureEvent::new(
                t_ms,
                ModuleId::Hand,
                GestureKind::IdleExit { hand: side },
            ));
        }
    }

    if slot.is_idle() {
        return Ok(());
    }

    if slot.had_cursor_role && !cursor_role {
        slot.release_pinch(t_ms, out);
        slot.leave_cursor_role();
    }
    slot.had_cursor_role = cursor_role;

    // Active but momentarily unusable: hold state until the debouncer decides.
    let Some(hand) = hand.filter(|_| !raw_idle) else {
        return Ok(());
    };
    let Ok(palm_px) = palm_size_px(hand, ctx.image) else {
        return Ok(());
    };

    let states = finger_states(hand, ctx.image, cfg.extended_deg, cfg.bent_deg)?;
    let label = pose_label(&states);
    if slot.pose != Some(label) {
        slot.pose = Some(label);
        out.push(GestureEvent::new(
            t_ms,
            ModuleId::Hand,
            GestureKind::PoseChanged {
                hand: side,
                label: label.to_string(),
            },
        ));
    }

    if !cursor_role {
        return Ok(());
    }

    let palm_smoothed = slot.palm.step(palm_px, t_ms)?;

    if is_fist(&states) {
        let wrist_y = to_pixels(&hand.points[idx::WRIST], ctx.image).y;
        let y = slot.scroll_y.step(wrist_y, t_ms)?;
        if let (Some(prev_y), Some(prev_t)) = (slot.fist_prev_y, slot.scroll_t_ms) {
            let travel = (y - prev_y) / palm_smoothed;
            let speed = travel.abs() / ((t_ms - prev_t) / 1000.0);
            if speed > cfg.scroll_deadzone {
                out.push(GestureEvent::new(
                    t_ms,
                    ModuleId::Hand,
                    GestureKind::Scroll {
                        delta: -cfg.scroll_gain * travel,
                    },
                ));
            }
        }
        slot.fist_prev_y = Some(y);
        slot.scroll_t_ms = Some(t_ms);
        return Ok(());
    }
    slot.scroll_y.reset();
    slot.fist_prev_y = None;
    slot.scroll_t_ms = None;

    let anchor = *slot.anchor.get_or_insert(hand.points[idx::WRIST].xy());
    let aspect = ctx.screen_w as f64 / ctx.screen_h as f64;
    let daoi = daoi_rect(anchor, palm_smoothed, ctx.image.w, cfg.c_scale, aspect);
    slot.daoi = Some(daoi);

    let tip = hand.points[idx::INDEX_TIP];
    let (fx, fy) = slot.cursor.step(tip.x, tip.y, t_ms)?;
    let (sx, sy) = map_to_screen(Point2::new(fx, fy), &daoi, ctx.screen_w, ctx.screen_h);
    let (dx, dy) = slot
        .last_cursor
        .map_or((0.0, 0.0), |(px, py)| (sx - px, sy - py));
    slot.last_cursor = Some((sx, sy));
    out.push(GestureEvent::new(
        t_ms,
        ModuleId::Hand,
        GestureKind::CursorMove {
            x: sx,
            y: sy,
            dx,
            dy,
        },
    ));

    let ratio = pinch_ratio(hand, ctx.image)?;
    slot.pinch_ratio = Some(ratio);
    let was = slot.pinch.is_active();
    let now = slot.pinch.step(ratio);
    if now != was {
        let kind = if now {
            GestureKind::PinchPress
        } else {
            GestureKind::PinchRelease
        };
        out.push(GestureEvent::new(t_ms, ModuleId::Hand, kind));
    }
    Ok(())
}
