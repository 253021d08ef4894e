//! Full-body exercise recognition over the pose skeleton.
//!
//! Per frame the module extracts [`PoseFeatures`] and runs, in this order:
//! squat, jump, punch left, punch right, kick left, kick right, cycling and
//! then the loaded templates in file order. Events within one frame follow
//! that order. Sitting mode disables jump and kick and narrows the knee band
//! that registers a cycling stroke.

pub mod detectors;
pub mod features;
pub mod template;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::GestureError;
use crate::event::{GestureEvent, GestureKind, ModuleId};
use crate::model::{ImageDims, PoseFrame};

pub use detectors::{
    CycleDetector, CycleSignal, JumpDetector, KickDetector, PunchDetector, RepCounter, RepPhase,
};
pub use features::{extract_features, joint_angle, PoseFeatures, ALL_FEATURES, TEMPLATE_FEATURES};
pub use template::{
    match_template, read_templates, record_template, GestureTemplate, TemplateMode,
};

pub const CYCLING_LABEL: &str = "cycling";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UseMode {
    #[default]
    Sitting,
    Standing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExerciseConfig {
    pub min_visibility: f64,
    pub squat_down_deg: f64,
    pub squat_up_deg: f64,
    /// Rolling window for the hip and ankle baselines.
    pub baseline_ms: f64,
    /// Hip rise, in torso lengths, that starts a jump.
    pub jump_rise: f64,
    pub jump_return_ms: f64,
    pub punch_retracted: f64,
    pub punch_extended: f64,
    pub punch_window_ms: f64,
    /// Ankle rise, in torso lengths, that counts as a kick.
    pub kick_rise: f64,
    pub refractory_ms: f64,
    pub cycle_min_period_ms: f64,
    pub cycle_max_period_ms: f64,
    /// Number of full cycles averaged for the cadence check.
    pub cycle_window: usize,
    pub cycle_timeout_ms: f64,
    /// Knee angle difference that registers which leg leads.
    pub cycle_band_standing_deg: f64,
    pub cycle_band_sitting_deg: f64,
    /// Consecutive frames beyond the band needed to change the leading leg;
    /// keeps angle noise on a still body from reading as pedalling.
    pub cycle_confirm_frames: u32,
    pub template_on: f64,
    pub template_off: f64,
    /// NDJSON template set loaded at start-up.
    pub templates: Option<PathBuf>,
}

impl Default for ExerciseConfig {
    fn default() -> Self {
        ExerciseConfig {
            min_visibility: 0.5,
            squat_down_deg: 100.0,
            squat_up_deg: 160.0,
            baseline_ms: 2000.0,
            jump_rise: 0.25,
            jump_return_ms: 1000.0,
            punch_retracted: 0.6,
            punch_extended: 0.9,
            punch_window_ms: 300.0,
            kick_rise: 0.5,
            refractory_ms: 250.0,
            cycle_min_period_ms: 300.0,
            cycle_max_period_ms: 3000.0,
            cycle_window: 4,
            cycle_timeout_ms: 2000.0,
            cycle_band_standing_deg: 15.0,
            cycle_band_sitting_deg: 10.0,
            cycle_confirm_frames: 2,
            template_on: 0.8,
            template_off: 0.7,
            templates: None,
        }
    }
}

impl ExerciseConfig {
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |f: &str, m: &str| Err((format!("exercise.{f}"), m.to_string()));
        if !(0.0..=1.0).contains(&self.min_visibility) {
            return err("min_visibility", "must be in [0, 1]");
        }
        if !(0.0 < self.squat_down_deg
            && self.squat_down_deg < self.squat_up_deg
            && self.squat_up_deg <= 180.0)
        {
            return err(
                "squat_down_deg",
                "need 0 < squat_down_deg < squat_up_deg <= 180",
            );
        }
        if !(self.baseline_ms > 0.0) {
            return err("baseline_ms", "must be > 0");
        }
        if !(self.jump_rise > 0.0 && self.jump_return_ms > 0.0) {
            return err("jump_rise", "jump_rise and jump_return_ms must be > 0");
        }
        if !(0.0 < self.punch_retracted && self.punch_retracted < self.punch_extended) {
            return err(
                "punch_retracted",
                "need 0 < punch_retracted < punch_extended",
            );
        }
        if !(self.punch_window_ms > 0.0) {
            return err("punch_window_ms", "must be > 0");
        }
        if !(self.kick_rise > 0.0) {
            return err("kick_rise", "must be > 0");
        }
        if !(self.refractory_ms >= 0.0) {
            return err("refractory_ms", "must be >= 0");
        }
        if !(0.0 < self.cycle_min_period_ms && self.cycle_min_period_ms < self.cycle_max_period_ms)
        {
            return err(
                "cycle_min_period_ms",
                "need 0 < cycle_min_period_ms < cycle_max_period_ms",
            );
        }
        if self.cycle_window == 0 {
            return err("cycle_window", "must be >= 1");
        }
        if !(self.cycle_timeout_ms > 0.0) {
            return err("cycle_timeout_ms", "must be > 0");
        }
        if !(self.cycle_band_standing_deg >= 0.0 && self.cycle_band_sitting_deg >= 0.0) {
            return err("cycle_band_standing_deg", "bands must be >= 0");
        }
        if self.cycle_confirm_frames == 0 {
            return err("cycle_confirm_frames", "must be >= 1");
        }
        if !(0.0 < self.template_off
            && self.template_off < self.template_on
            && self.template_on <= 1.0)
        {
            return err("template_on", "need 0 < template_off < template_on <= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LabelStats {
    pub active_ms: f64,
    pub reps: u64,
}

/// Per-label time and repetition totals for one session.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SessionStats {
    pub labels: BTreeMap<String, LabelStats>,
}

impl SessionStats {
    pub fn get(&self, label: &str) -> LabelStats {
        self.labels.get(label).copied().unwrap_or_default()
    }

    fn entry(&mut self, label: &str) -> &mut LabelStats {
        self.labels.entry(label.to_string()).or_default()
    }
}

#[derive(Debug, Clone)]
struct TemplateSlot {
    template: GestureTemplate,
    engaged: bool,
    confidence: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExerciseTelemetry {
    pub features: PoseFeatures,
    pub active: Vec<String>,
    pub confidences: BTreeMap<String, f64>,
    pub stats: SessionStats,
}

pub struct ExerciseModule {
    cfg: ExerciseConfig,
    mode: UseMode,
    squat: RepCounter,
    jump: JumpDetector,
    punch_left: PunchDetector,
    punch_right: PunchDetector,
    kick_left: KickDetector,
    kick_right: KickDetector,
    cycle: CycleDetector,
    templates: Vec<TemplateSlot>,
    /// Active labels with the time they were last accounted up to.
    active: BTreeMap<String, f64>,
    stats: SessionStats,
    features: PoseFeatures,
    last_t_ms: Option<f64>,
}

impl ExerciseModule {
    pub fn new(
        cfg: ExerciseConfig,
        mode: UseMode,
        templates: Vec<GestureTemplate>,
    ) -> Result<Self, GestureError> {
        cfg.validate()
            .map_err(|(f, m)| GestureError::InvalidThresholds(format!("{f}: {m}")))?;
        for t in &templates {
            t.validate()?;
            if t.name == CYCLING_LABEL {
                return Err(GestureError::InvalidThresholds(format!(
                    "template name {CYCLING_LABEL:?} is reserved"
                )));
            }
        }
        Ok(ExerciseModule {
            squat: RepCounter::new(cfg.squat_down_deg, cfg.squat_up_deg),
            jump: JumpDetector::default(),
            punch_left: PunchDetector::default(),
            punch_right: PunchDetector::default(),
            kick_left: KickDetector::default(),
            kick_right: KickDetector::default(),
            cycle: CycleDetector::default(),
            templates: templates
                .into_iter()
                .map(|template| TemplateSlot {
                    template,
                    engaged: false,
                    confidence: None,
                })
                .collect(),
            active: BTreeMap::new(),
            stats: SessionStats::default(),
            features: PoseFeatures::default(),
            last_t_ms: None,
            cfg,
            mode,
        })
    }

    pub fn mode(&self) -> UseMode {
        self.mode
    }

    pub fn stats(&self) -> &SessionStats {
        &self.stats
    }

    pub fn active_labels(&self) -> Vec<String> {
        self.active.keys().cloned().collect()
    }

    pub fn templates(&self) -> impl Iterator<Item = &GestureTemplate> {
        self.templates.iter().map(|s| &s.template)
    }

    /// Adds a template, replacing one with the same name.
    pub fn upsert_template(&mut self, template: GestureTemplate) -> Result<(), GestureError> {
        template.validate()?;
        if template.name == CYCLING_LABEL {
            return Err(GestureError::InvalidThresholds(format!(
                "template name {CYCLING_LABEL:?} is reserved"
            )));
        }
        let slot = TemplateSlot {
            template,
            engaged: false,
            confidence: None,
        };
        match self
            .templates
            .iter_mut()
            .find(|s| s.template.name == slot.template.name)
        {
            Some(existing) => *existing = slot,
            None => self.templates.push(slot),
        }
        Ok(())
    }

    /// Carries session totals over from a module this one replaces.
    pub fn adopt_stats(&mut self, stats: SessionStats) {
        self.stats = stats;
    }

    pub fn telemetry(&self) -> ExerciseTelemetry {
        ExerciseTelemetry {
            features: self.features,
            active: self.active_labels(),
            confidences: self
                .templates
                .iter()
                .filter_map(|s| Some((s.template.name.clone(), s.confidence?)))
                .collect(),
            stats: self.stats.clone(),
        }
    }

    /// Closes every active label at `t_ms` and returns the Deactivate events.
    pub fn deactivate_all(&mut self, t_ms: f64) -> Vec<GestureEvent> {
        let mut out = Vec::new();
        for (label, since) in std::mem::take(&mut self.active) {
            self.stats.entry(&label).active_ms += (t_ms - since).max(0.0);
            out.push(GestureEvent::new(
                t_ms,
                ModuleId::Exercise,
                GestureKind::Deactivate { label },
            ));
        }
        for s in &mut self.templates {
            s.engaged = false;
        }
        if self.cycle.is_active() {
            self.cycle.reset();
        }
        out
    }

    fn reset_motion(&mut self) {
        self.squat.reset_phase();
        self.jump.reset();
        self.punch_left.reset();
        self.punch_right.reset();
        self.kick_left.reset();
        self.kick_right.reset();
        self.cycle.reset();
        for s in &mut self.templates {
            s.engaged = false;
            s.confidence = None;
        }
        self.features = PoseFeatures::default();
    }

    fn activate(&mut self, label: &str, confidence: f64, t_ms: f64, out: &mut Vec<GestureEvent>) {
        self.active.insert(label.to_string(), t_ms);
        out.push(GestureEvent::new(
            t_ms,
            ModuleId::Exercise,
            GestureKind::Activate {
                label: label.to_string(),
                confidence,
            },
        ));
    }

    fn deactivate(&mut self, label: &str, t_ms: f64, out: &mut Vec<GestureEvent>) {
        if let Some(since) = self.active.remove(label) {
            self.stats.entry(label).active_ms += t_ms - since;
            out.push(GestureEvent::new(
                t_ms,
                ModuleId::Exercise,
                GestureKind::Deactivate {
                    label: label.to_string(),
                },
            ));
        }
    }

    fn rep(&mut self, label: &str, kind: GestureKind, t_ms: f64, out: &mut Vec<GestureEvent>) {
        self.stats.entry(label).reps += 1;
        out.push(GestureEvent::new(t_ms, ModuleId::Exercise, kind));
    }

    pub fn step(
        &mut self,
        pose: Option<&PoseFrame>,
        dims: ImageDims,
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

        let Some(pose) = pose else {
            let out = self.deactivate_all(t_ms);
            self.reset_motion();
            return Ok(out);
        };

        // running totals for labels that stay active
        for (label, since) in self.active.iter_mut() {
            self.stats
                .labels
                .entry(label.clone())
                .or_default()
                .active_ms += t_ms - *since;
            *since = t_ms;
        }

        let f = extract_features(pose, dims, self.cfg.min_visibility);
        self.features = f;
        let cfg = self.cfg.clone();
        let standing = self.mode == UseMode::Standing;
        let mut out = Vec::new();

        if let Some(count) = detectors::detect_squat(&mut self.squat, &f, t_ms) {
            self.rep("squat", GestureKind::SquatRep { count }, t_ms, &mut out);
        }
        if standing {
            if let Some(count) = self.jump.step(&f, &cfg, t_ms) {
                self.rep("jump", GestureKind::JumpRep { count }, t_ms, &mut out);
            }
        }
        if self.punch_left.step(f.reach_left, &cfg, t_ms) {
            self.rep("punch_left", GestureKind::PunchLeft, t_ms, &mut out);
        }
        if self.punch_right.step(f.reach_right, &cfg, t_ms) {
            self.rep("punch_right", GestureKind::PunchRight, t_ms, &mut out);
        }
        if standing {
            let lift_l = self
                .kick_left
                .observe(f.ankle_left_y, f.torso_len, &cfg, t_ms);
            let lift_r = self
                .kick_right
                .observe(f.ankle_right_y, f.torso_len, &cfg, t_ms);
            if self.kick_left.decide(lift_l, lift_r, &cfg, t_ms) {
                self.rep("kick_left", GestureKind::KickLeft, t_ms, &mut out);
            }
            if self.kick_right.decide(lift_r, lift_l, &cfg, t_ms) {
                self.rep("kick_right", GestureKind::KickRight, t_ms, &mut out);
            }
        }

        let band = if standing {
            cfg.cycle_band_standing_deg
        } else {
            cfg.cycle_band_sitting_deg
        };
        for signal in self.cycle.step(&f, &cfg, band, t_ms) {
            match signal {
                CycleSignal::Activate => self.activate(CYCLING_LABEL, 1.0, t_ms, &mut out),
                CycleSignal::Deactivate => self.deactivate(CYCLING_LABEL, t_ms, &mut out),
                CycleSignal::Rep(count) => self.rep(
                    CYCLING_LABEL,
                    GestureKind::CycleRep { count },
                    t_ms,
                    &mut out,
                ),
            }
        }

        for i in 0..self.templates.len() {
            let conf = match_template(&f, &self.templates[i].template).ok();
            let slot = &mut self.templates[i];
            slot.confidence = conf;
            let c = conf.unwrap_or(0.0);
            let was = slot.engaged;
            let now = if was {
                c >= cfg.template_off
            } else {
                c >= cfg.template_on
            };
            slot.engaged = now;
            let (name, mode) = (slot.template.name.clone(), slot.template.mode);
            match (mode, was, now) {
                (TemplateMode::Hold, false, true) => self.activate(&name, c, t_ms, &mut out),
                (TemplateMode::Hold, true, false) => self.deactivate(&name, t_ms, &mut out),
                (TemplateMode::Rep, false, true) => self.rep(
                    &name,
                    GestureKind::TemplateRep {
                        label: name.clone(),
                        confidence: c,
                    },
                    t_ms,
                    &mut out,
                ),
                _ => {}
            }
        }
        Ok(out)
    }
}
