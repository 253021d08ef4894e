//! Built-in exercise detectors. Each is a small automaton fed one
//! [`PoseFeatures`] per frame; thresholds that depend on body size are
//! expressed in torso lengths or arm lengths.

use std::collections::VecDeque;

use serde::Serialize;

use super::features::PoseFeatures;
use super::ExerciseConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RepPhase {
    Neutral,
    Down,
    Up,
}

/// Counts dips below `down_below` followed by a recovery above `up_above`.
#[derive(Debug, Clone, PartialEq)]
pub struct RepCounter {
    phase: RepPhase,
    count: u64,
    down_below: f64,
    up_above: f64,
    last_transition_ms: Option<f64>,
}

impl RepCounter {
    pub fn new(down_below: f64, up_above: f64) -> Self {
        assert!(down_below < up_above, "rep counter band is inverted");
        RepCounter {
            phase: RepPhase::Neutral,
            count: 0,
            down_below,
            up_above,
            last_transition_ms: None,
        }
    }

    pub fn phase(&self) -> RepPhase {
        self.phase
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn last_transition_ms(&self) -> Option<f64> {
        self.last_transition_ms
    }

    pub fn reset_phase(&mut self) {
        self.phase = RepPhase::Neutral;
    }

    /// Returns the new count when a rep completes.
    pub fn step(&mut self, value: f64, t_ms: f64) -> Option<u64> {
        match self.phase {
            RepPhase::Neutral | RepPhase::Up if value < self.down_below => {
                self.phase = RepPhase::Down;
                self.last_transition_ms = Some(t_ms);
                None
            }
            RepPhase::Down if value > self.up_above => {
                self.phase = RepPhase::Up;
                self.count += 1;
                self.last_transition_ms = Some(t_ms);
                Some(self.count)
            }
            _ => None,
        }
    }
}

/// Squat reps from the smaller of the two knee angles.
pub fn detect_squat(counter: &mut RepCounter, features: &PoseFeatures, t_ms: f64) -> Option<u64> {
    counter.step(features.min_knee()?, t_ms)
}

/// Values from the last `span_ms` milliseconds.
#[derive(Debug, Clone, Default)]
struct Window {
    samples: VecDeque<(f64, f64)>,
}

impl Window {
    fn push(&mut self, t_ms: f64, v: f64) {
        self.samples.push_back((t_ms, v));
    }

    fn evict(&mut self, t_ms: f64, span_ms: f64) {
        while self
            .samples
            .front()
            .is_some_and(|&(t, _)| t < t_ms - span_ms)
        {
            self.samples.pop_front();
        }
    }

    fn median(&self) -> Option<f64> {
        if self.samples.is_empty() {
            return None;
        }
        let mut v: Vec<f64> = self.samples.iter().map(|&(_, v)| v).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        })
    }

    fn max(&self) -> Option<f64> {
        self.samples.iter().map(|&(_, v)| v).reduce(f64::max)
    }

    fn clear(&mut self) {
        self.samples.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum JumpPhase {
    Grounded,
    Airborne {
        since_ms: f64,
    },
    /// Rose but did not come back in time; waits for the baseline to catch up.
    Aborted,
}

/// Jump reps: the hip midpoint rises above its rolling median baseline by
/// more than `jump_rise` torso lengths and comes back within
/// `jump_return_ms`. The baseline is frozen while airborne.
#[derive(Debug, Clone)]
pub struct JumpDetector {
    baseline: Window,
    phase: JumpPhase,
    count: u64,
}

impl Default for JumpDetector {
    fn default() -> Self {
        JumpDetector {
            baseline: Window::default(),
            phase: JumpPhase::Grounded,
            count: 0,
        }
    }
}

impl JumpDetector {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn reset(&mut self) {
        self.baseline.clear();
        self.phase = JumpPhase::Grounded;
    }

    pub fn step(
        &mut self,
        features: &PoseFeatures,
        cfg: &ExerciseConfig,
        t_ms: f64,
    ) -> Option<u64> {
        let (hip, torso) = (features.hip_mid_y?, features.torso_len?);
        self.baseline.evict(t_ms, cfg.baseline_ms);
        let Some(base) = self.baseline.median() else {
            self.baseline.push(t_ms, hip);
            return None;
        };
        // image y grows downward, so rising lowers y
        let rise = (base - hip) / torso;
        let landed = rise < cfg.jump_rise / 2.0;
        let mut rep = None;
        match self.phase {
            JumpPhase::Grounded => {
                if rise > cfg.jump_rise {
                    self.phase = JumpPhase::Airborne { since_ms: t_ms };
                } else {
                    self.baseline.push(t_ms, hip);
                }
            }
            JumpPhase::Airborne { since_ms } => {
                if landed {
                    self.phase = JumpPhase::Grounded;
                    if t_ms - since_ms <= cfg.jump_return_ms {
                        self.count += 1;
                        rep = Some(self.count);
                    }
                    self.baseline.push(t_ms, hip);
                } else if t_ms - since_ms > cfg.jump_return_ms {
                    self.phase = JumpPhase::Aborted;
                    self.baseline.push(t_ms, hip);
                }
            }
            JumpPhase::Aborted => {
                self.baseline.push(t_ms, hip);
                if landed {
                    self.phase = JumpPhase::Grounded;
                }
            }
        }
        rep
    }
}

/// Fast arm extension: reach goes from below `punch_retracted` to above
/// `punch_extended` within `punch_window_ms`.
#[derive(Debug, Clone, Default)]
pub struct PunchDetector {
    last_retracted_ms: Option<f64>,
    armed: bool,
    last_event_ms: Option<f64>,
}

impl PunchDetector {
    pub fn reset(&mut self) {
        self.last_retracted_ms = None;
        self.armed = false;
    }

    pub fn step(&mut self, reach: Option<f64>, cfg: &ExerciseConfig, t_ms: f64) -> bool {
        let Some(reach) = reach else {
            return false;
        };
        if reach < cfg.punch_retracted {
            self.last_retracted_ms = Some(t_ms);
            self.armed = true;
            return false;
        }
        if reach <= cfg.punch_extended || !self.armed {
            return false;
        }
        self.armed = false;
        let fast = self
            .last_retracted_ms
            .is_some_and(|t| t_ms - t <= cfg.punch_window_ms);
        let rested = self
            .last_event_ms
            .is_none_or(|t| t_ms - t >= cfg.refractory_ms);
        if fast && rested {
            self.last_event_ms = Some(t_ms);
            true
        } else {
            false
        }
    }
}

/// One ankle lifting well above the standing ankle level (rolling maximum
/// of the ankle's image y) while the other stays near the floor.
#[derive(Debug, Clone)]
pub struct KickDetector {
    floor: Window,
    armed: bool,
    last_event_ms: Option<f64>,
}

impl Default for KickDetector {
    fn default() -> Self {
        KickDetector {
            floor: Window::default(),
            armed: true,
            last_event_ms: None,
        }
    }
}

impl KickDetector {
    pub fn reset(&mut self) {
        self.floor.clear();
        self.armed = true;
    }

    /// Lift of this ankle above its floor level, in torso lengths.
    pub fn observe(
        &mut self,
        ankle_y: Option<f64>,
        torso: Option<f64>,
        cfg: &ExerciseConfig,
        t_ms: f64,
    ) -> Option<f64> {
        let (y, torso) = (ankle_y?, torso?);
        self.floor.evict(t_ms, cfg.baseline_ms);
        self.floor.push(t_ms, y);
        Some((self.floor.max()? - y) / torso)
    }

    pub fn decide(
        &mut self,
        lift: Option<f64>,
        other_lift: Option<f64>,
        cfg: &ExerciseConfig,
        t_ms: f64,
    ) -> bool {
        let Some(lift) = lift else {
            return false;
        };
        let rearm = cfg.kick_rise / 2.0;
        if lift < rearm {
            self.armed = true;
            return false;
        }
        let other_grounded = other_lift.is_none_or(|o| o < rearm);
        if lift > cfg.kick_rise && self.armed && other_grounded {
            self.armed = false;
            let rested = self
                .last_event_ms
                .is_none_or(|t| t_ms - t >= cfg.refractory_ms);
            if rested {
                self.last_event_ms = Some(t_ms);
                return true;
            }
        }
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LegLead {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CycleSignal {
    Activate,
    Deactivate,
    Rep(u64),
}

/// Pedalling: the sign of `knee_left - knee_right` alternating at a cadence
/// inside the configured period range. A rep is one revolution, counted when a
/// valid left-lead half hands over to the right.
#[derive(Debug, Clone, Default)]
pub struct CycleDetector {
    lead: Option<LegLead>,
    lead_since_ms: Option<f64>,
    /// Challenger lead and how many consecutive frames it has held.
    pending: Option<(LegLead, u32)>,
    halves: VecDeque<f64>,
    last_alternation_ms: Option<f64>,
    active: bool,
    count: u64,
}

impl CycleDetector {
    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Mean full-cycle period over the window, in ms.
    pub fn period_ms(&self) -> Option<f64> {
        if self.halves.is_empty() {
            return None;
        }
        Some(2.0 * self.halves.iter().sum::<f64>() / self.halves.len() as f64)
    }

    /// Forgets the motion history; an active session must be closed by the
    /// caller.
    pub fn reset(&mut self) {
        let count = self.count;
        *self = CycleDetector::default();
        self.count = count;
    }

    pub fn step(
        &mut self,
        features: &PoseFeatures,
        cfg: &ExerciseConfig,
        band_deg: f64,
        t_ms: f64,
    ) -> Vec<CycleSignal> {
        let mut out = Vec::new();
        if let (Some(l), Some(r)) = (features.knee_left, features.knee_right) {
            let diff = l - r;
            let lead = if diff > band_deg {
                Some(LegLead::Left)
            } else if diff < -band_deg {
                Some(LegLead::Right)
            } else {
                None
            };
            let challenger = lead.filter(|&now| self.lead != Some(now));
            self.pending = challenger.map(|c| match self.pending {
                Some((p, n)) if p == c => (c, n + 1),
                _ => (c, 1),
            });
            let confirmed = self
                .pending
                .filter(|&(_, n)| n >= cfg.cycle_confirm_frames)
                .map(|(c, _)| c);
            if let Some(lead) = confirmed {
                self.pending = None;
                if let (Some(_), Some(since)) = (self.lead, self.lead_since_ms) {
                    let half = t_ms - since;
                    let valid = half >= cfg.cycle_min_period_ms / 2.0
                        && half <= cfg.cycle_max_period_ms / 2.0;
                    if valid {
                        self.halves.push_back(half);
                        while self.halves.len() > 2 * cfg.cycle_window {
                            self.halves.pop_front();
                        }
                        self.last_alternation_ms = Some(t_ms);
                        if !self.active && self.cadence_ok(cfg) {
                            self.active = true;
                            out.push(CycleSignal::Activate);
                        }
                        // one rep per revolution: a valid left half handing over to the right
                        if lead == LegLead::Right {
                            self.count += 1;
                            out.push(CycleSignal::Rep(self.count));
                        }
                    } else {
                        self.halves.clear();
                    }
                }
                self.lead = Some(lead);
                self.lead_since_ms = Some(t_ms);
            }
        }
        if self.active {
            let stale = self
                .last_alternation_ms
                .is_none_or(|t| t_ms - t > cfg.cycle_timeout_ms);
            if stale || !self.cadence_ok(cfg) {
                self.active = false;
                self.halves.clear();
                out.push(CycleSignal::Deactivate);
            }
        }
        out
    }

    fn cadence_ok(&self, cfg: &ExerciseConfig) -> bool {
        self.period_ms()
            .is_some_and(|p| p >= cfg.cycle_min_period_ms && p <= cfg.cycle_max_period_ms)
    }
}
