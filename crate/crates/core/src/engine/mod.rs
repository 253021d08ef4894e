//! The per-frame pipeline: range gate, gesture modules in the fixed order
//! hand, head, gaze, exercise, cursor arbitration, binding and the held-state
//! filter that keeps every Down matched by exactly one Up.
//!
//! Configuration changes are queued and applied at the start of the next
//! frame, so no frame ever sees a mixture of old and new values. Each applied
//! change bumps the config epoch reported in telemetry.

pub mod binding;
pub mod command;
pub mod config;
pub mod control;

use std::collections::{BTreeSet, VecDeque};
use std::io::BufRead;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{EngineError, GestureError};
use crate::event::{GestureEvent, GestureKind, ModuleId};
use crate::exercise::{
    extract_features, record_template, ExerciseModule, GestureTemplate, PoseFeatures, SessionStats,
    TemplateMode, CYCLING_LABEL, TEMPLATE_FEATURES,
};
use crate::face::{HeadContext, HeadState};
use crate::gaze::{resolve_depth, CameraModel, DepthEstimate, DepthSource, GazeModule};
use crate::hand::{HandContext, HandModule};
use crate::model::{is_header_record, parse_frame, Handedness, LandmarkFrame};

use binding::{bind, Profile};
use command::{Command, CommandSink, InputCommand, MouseButton};
use config::EngineConfig;

/// Number of recent non-cursor events kept for telemetry.
pub const RECENT_EVENTS: usize = 20;

/// A change requested through the control channel.
#[derive(Debug, Clone, PartialEq)]
pub enum Change {
    Set { path: String, value: Value },
    Profile(String),
    RecordStart { name: String, mode: TemplateMode },
    RecordStop,
}

/// Result of one queued [`Change`], tagged with the caller's ticket.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeOutcome {
    pub ticket: u64,
    /// Index of the first frame processed under the change.
    pub frame: u64,
    pub epoch: u64,
    pub result: Result<Value, (String, String)>,
}

/// Suppressed when the resolved subject depth is beyond `max_range_mm`.
/// The configured default depth is a guess, not a measurement, and never
/// suppresses.
pub fn range_gate(
    frame: &LandmarkFrame,
    depth: &DepthEstimate,
    max_range_mm: f64,
) -> Option<LandmarkFrame> {
    if depth.source != DepthSource::Default && depth.depth_mm > max_range_mm {
        None
    } else {
        Some(frame.clone())
    }
}

/// Keeps only the cursor moves of the highest-priority module that emitted
/// any; modules absent from `priority` never move the cursor.
pub fn arbitrate_cursor(events: &mut Vec<GestureEvent>, priority: &[ModuleId]) {
    let winner = priority
        .iter()
        .copied()
        .find(|m| events.iter().any(|e| e.is_cursor_move() && e.source == *m));
    events.retain(|e| !e.is_cursor_move() || Some(e.source) == winner);
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub frames: u64,
    pub suppressed_frames: u64,
    pub events: u64,
    pub commands: u64,
    pub warnings: u64,
    pub exercise: SessionStats,
}

struct Recording {
    name: String,
    mode: TemplateMode,
    samples: Vec<PoseFeatures>,
}

pub struct Engine {
    config: EngineConfig,
    profile: Profile,
    epoch: u64,
    hand: HandModule,
    head: HeadState,
    gaze: GazeModule,
    exercise: ExerciseModule,
    held_keys: BTreeSet<String>,
    held_buttons: BTreeSet<MouseButton>,
    frame_index: u64,
    last_t_ms: Option<f64>,
    recent: VecDeque<GestureEvent>,
    depth: Option<DepthEstimate>,
    suppressed: bool,
    pending: VecDeque<(u64, Change)>,
    outcomes: Vec<ChangeOutcome>,
    recording: Option<Recording>,
    stats: RunStats,
}

fn gesture(e: GestureError) -> EngineError {
    EngineError::Gesture(e)
}

fn build_hand(cfg: &EngineConfig) -> Result<HandModule, EngineError> {
    HandModule::new(cfg.hand.clone()).map_err(gesture)
}

fn build_head(cfg: &EngineConfig) -> Result<HeadState, EngineError> {
    HeadState::new(cfg.head.clone(), cfg.screen.width_px, cfg.screen.height_px).map_err(gesture)
}

fn build_exercise(
    cfg: &EngineConfig,
    templates: Vec<GestureTemplate>,
) -> Result<ExerciseModule, EngineError> {
    ExerciseModule::new(cfg.exercise.clone(), cfg.mode, templates).map_err(gesture)
}

impl Engine {
    pub fn new(
        config: EngineConfig,
        templates: Vec<GestureTemplate>,
    ) -> Result<Engine, EngineError> {
        config.validate()?;
        Ok(Engine {
            profile: config.resolve_profile(&config.profile)?,
            hand: build_hand(&config)?,
            head: build_head(&config)?,
            gaze: GazeModule::new(config.gaze.clone()),
            exercise: build_exercise(&config, templates)?,
            config,
            epoch: 0,
            held_keys: BTreeSet::new(),
            held_buttons: BTreeSet::new(),
            frame_index: 0,
            last_t_ms: None,
            recent: VecDeque::new(),
            depth: None,
            suppressed: false,
            pending: VecDeque::new(),
            outcomes: Vec::new(),
            recording: None,
            stats: RunStats::default(),
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// Index of the next frame to be processed.
    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn stats(&self) -> RunStats {
        RunStats {
            exercise: self.exercise.stats().clone(),
            ..self.stats.clone()
        }
    }

    pub fn count_warning(&mut self) {
        self.stats.warnings += 1;
    }

    pub fn exercise(&self) -> &ExerciseModule {
        &self.exercise
    }

    pub fn hand(&self) -> &HandModule {
        &self.hand
    }

    pub fn head(&self) -> &HeadState {
        &self.head
    }

    /// Queues a change for the next frame boundary.
    pub fn queue(&mut self, ticket: u64, change: Change) {
        self.pending.push_back((ticket, change));
    }

    pub fn take_outcomes(&mut self) -> Vec<ChangeOutcome> {
        std::mem::take(&mut self.outcomes)
    }

    fn camera(&self, frame: &LandmarkFrame) -> CameraModel {
        self.config
            .camera
            .unwrap_or_else(|| CameraModel::for_image(frame.image))
    }

    fn release_all(&mut self, t_ms: f64, out: &mut Vec<InputCommand>) {
        for key in std::mem::take(&mut self.held_keys) {
            out.push(InputCommand::new(t_ms, Command::KeyUp(key)));
        }
        for b in std::mem::take(&mut self.held_buttons) {
            out.push(InputCommand::new(t_ms, Command::MouseUp(b)));
        }
    }

    /// Drops presses of something already held and releases of something not
    /// held.
    fn admit(&mut self, cmd: &Command) -> bool {
        match cmd {
            Command::KeyDown(k) => self.held_keys.insert(k.clone()),
            Command::KeyUp(k) => self.held_keys.remove(k),
            Command::MouseDown(b) => self.held_buttons.insert(*b),
            Command::MouseUp(b) => self.held_buttons.remove(b),
            _ => true,
        }
    }

    /// Swaps in a new configuration, rebuilding only the modules whose
    /// settings changed. Returns whether held inputs must be released.
    fn install(&mut self, next: EngineConfig, t_ms: f64) -> Result<bool, EngineError> {
        let old = &self.config;
        let profile = next.resolve_profile(&next.profile)?;
        let mut disruptive = profile != self.profile || next.modules != old.modules;
        let hand = (next.hand != old.hand || next.modules.hand != old.modules.hand)
            .then(|| build_hand(&next))
            .transpose()?;
        let head = (next.head != old.head
            || next.screen != old.screen
            || next.modules.head != old.modules.head)
            .then(|| build_head(&next))
            .transpose()?;
        let gaze = (next.gaze != old.gaze || next.modules.gaze != old.modules.gaze)
            .then(|| GazeModule::new(next.gaze.clone()));
        let exercise_changed = next.exercise != old.exercise
            || next.mode != old.mode
            || next.modules.exercise != old.modules.exercise;
        let exercise = if exercise_changed {
            let templates = self.exercise.templates().cloned().collect();
            let mut fresh = build_exercise(&next, templates)?;
            self.exercise.deactivate_all(t_ms);
            fresh.adopt_stats(self.exercise.stats().clone());
            Some(fresh)
        } else {
            None
        };
        disruptive |= hand.is_some() || head.is_some() || gaze.is_some() || exercise.is_some();
        if let Some(m) = hand {
            self.hand = m;
        }
        if let Some(m) = head {
            self.head = m;
        }
        if let Some(m) = gaze {
            self.gaze = m;
        }
        if let Some(m) = exercise {
            self.exercise = m;
        }
        self.profile = profile;
        self.config = next;
        self.epoch += 1;
        Ok(disruptive)
    }

    fn apply_change(
        &mut self,
        change: Change,
        t_ms: f64,
        out: &mut Vec<InputCommand>,
    ) -> Result<Value, (String, String)> {
        let install = |engine: &mut Engine, next: EngineConfig, out: &mut Vec<InputCommand>| {
            match engine.install(next, t_ms) {
                Ok(true) => engine.release_all(t_ms, out),
                Ok(false) => {}
                Err(EngineError::Config(c)) => return Err((c.field, c.message)),
                Err(e) => return Err((String::new(), e.to_string())),
            }
            Ok(())
        };
        match change {
            Change::Set { path, value } => {
                let next = self
                    .config
                    .with_path(&path, value)
                    .map_err(|e| (e.field, e.message))?;
                install(self, next, out)?;
                Ok(self.config.get_path(&path).unwrap_or(Value::Null))
            }
            Change::Profile(name) => {
                let mut next = self.config.clone();
                next.profile = name.clone();
                next.validate().map_err(|e| (e.field, e.message))?;
                install(self, next, out)?;
                Ok(json!(name))
            }
            Change::RecordStart { name, mode } => {
                if name.is_empty() {
                    return Err(("name".into(), "template name must not be empty".into()));
                }
                if name == CYCLING_LABEL {
                    return Err((
                        "name".into(),
                        format!("template name {CYCLING_LABEL:?} is reserved"),
                    ));
                }
                self.recording = Some(Recording {
                    name: name.clone(),
                    mode,
                    samples: Vec::new(),
                });
                Ok(json!({"recording": name}))
            }
            Change::RecordStop => {
                let rec = self.recording.take().ok_or_else(|| {
                    ("record".to_string(), "no recording in progress".to_string())
                })?;
                let t = record_template(&rec.name, &rec.samples, &TEMPLATE_FEATURES, rec.mode)
                    .map_err(|e| ("record".to_string(), e.to_string()))?;
                self.exercise
                    .upsert_template(t.clone())
                    .map_err(|e| ("record".to_string(), e.to_string()))?;
                Ok(serde_json::to_value(&t).expect("template serializes"))
            }
        }
    }

    /// Runs one frame through the pipeline and returns the commands for the
    /// sink, all stamped with the frame's timestamp.
    pub fn step(&mut self, frame: &LandmarkFrame) -> Result<Vec<InputCommand>, EngineError> {
        let t = frame.t_ms;
        if let Some(prev) = self.last_t_ms {
            if t < prev {
                return Err(GestureError::NonMonotonicTime {
                    prev_ms: prev,
                    t_ms: t,
                }
                .into());
            }
        }
        self.last_t_ms = Some(t);
        let mut out = Vec::new();

        while let Some((ticket, change)) = self.pending.pop_front() {
            let result = self.apply_change(change, t, &mut out);
            self.outcomes.push(ChangeOutcome {
                ticket,
                frame: self.frame_index,
                epoch: self.epoch,
                result,
            });
        }

        let camera = self.camera(frame);
        let depth = resolve_depth(
            frame,
            &camera,
            self.config.hand.depth_k_mm_px,
            &self.config.gaze,
        );
        self.depth = Some(depth);
        let gated = range_gate(frame, &depth, self.config.max_range_mm);
        self.suppressed = gated.is_none();
        let frame = gated.unwrap_or_else(|| frame.without_subject());
        if self.suppressed {
            self.stats.suppressed_frames += 1;
        }

        let cfg = &self.config;
        let mut events = Vec::new();
        if cfg.modules.hand {
            let ctx = HandContext {
                image: frame.image,
                screen_w: cfg.screen.width_px,
                screen_h: cfg.screen.height_px,
            };
            events.extend(self.hand.step(&frame.hands, ctx, t)?);
        }
        if cfg.modules.head {
            let ctx = HeadContext {
                image: frame.image,
                screen_w: cfg.screen.width_px,
                screen_h: cfg.screen.height_px,
            };
            events.extend(self.head.step(frame.face.as_ref(), ctx, t)?);
        }
        if cfg.modules.gaze {
            events.extend(self.gaze.step(
                frame.face.as_ref(),
                frame.image,
                depth,
                &camera,
                &cfg.screen,
                cfg.head.pitch_ref_ratio,
                t,
            )?);
        }
        if cfg.modules.exercise {
            events.extend(self.exercise.step(frame.pose.as_ref(), frame.image, t)?);
        }
        if let (Some(rec), Some(pose)) = (self.recording.as_mut(), frame.pose.as_ref()) {
            rec.samples.push(extract_features(
                pose,
                frame.image,
                self.config.exercise.min_visibility,
            ));
        }
        arbitrate_cursor(&mut events, &self.config.cursor_priority);

        for e in &events {
            for cmd in bind(e, &self.profile) {
                if self.admit(&cmd) {
                    out.push(InputCommand::new(t, cmd));
                }
            }
            if !e.is_cursor_move() {
                if self.recent.len() == RECENT_EVENTS {
                    self.recent.pop_front();
                }
                self.recent.push_back(e.clone());
            }
        }
        self.stats.events += events.len() as u64;
        self.stats.commands += out.len() as u64;
        self.stats.frames += 1;
        self.frame_index += 1;
        Ok(out)
    }

    /// Ends the session: closes exercise activations and releases every held
    /// key and button.
    pub fn finish(&mut self) -> Vec<InputCommand> {
        let t = self.last_t_ms.unwrap_or(0.0);
        self.exercise.deactivate_all(t);
        let mut out = Vec::new();
        self.release_all(t, &mut out);
        self.stats.commands += out.len() as u64;
        out
    }

    pub fn telemetry(&self) -> Value {
        let slot = |side: Handedness| {
            let s = self.hand.slot(side);
            json!({
                "idle": s.is_idle(),
                "pinch_ratio": s.pinch_ratio(),
                "pose": s.pose(),
                "daoi": s.daoi(),
            })
        };
        let m = self.config.modules;
        json!({
            "type": "telemetry",
            "frame": self.frame_index.saturating_sub(1),
            "t": self.last_t_ms,
            "epoch": self.epoch,
            "profile": self.profile.name(),
            "suppressed": self.suppressed,
            "depth": self.depth,
            "hand": if m.hand { json!({"right": slot(Handedness::Right), "left": slot(Handedness::Left)}) } else { Value::Null },
            "head": if m.head { json!(self.head.telemetry()) } else { Value::Null },
            "gaze": if m.gaze { json!(self.gaze.telemetry()) } else { Value::Null },
            "exercise": if m.exercise { json!(self.exercise.telemetry()) } else { Value::Null },
            "recording": self.recording.as_ref().map(|r| r.name.clone()),
            "events": self.recent,
            "config": self.config.to_json(),
        })
    }
}

/// How the stream reader treats lines that fail to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    /// Skip the line, count a warning and continue.
    #[default]
    Lenient,
    Strict,
}

/// Called after every frame with the engine, e.g. to service control
/// requests and publish telemetry.
pub trait FrameHook {
    fn before_frame(&mut self, _engine: &mut Engine) {}
    fn after_frame(&mut self, _engine: &mut Engine) {}
}

impl FrameHook for () {}

/// Streams NDJSON frames from `input` through the engine into `sink` until
/// EOF, then balances held inputs.
pub fn run_stream<R: BufRead, S: CommandSink + ?Sized, H: FrameHook>(
    engine: &mut Engine,
    input: R,
    sink: &mut S,
    policy: ErrorPolicy,
    hook: &mut H,
) -> Result<RunStats, EngineError> {
    let send = |sink: &mut S, cmds: &[InputCommand]| -> Result<(), EngineError> {
        for c in cmds {
            sink.send(c)
                .map_err(|e| EngineError::io("writing command", e))?;
        }
        Ok(())
    };
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| EngineError::io("reading input", e))?;
        if line.trim().is_empty() || is_header_record(&line) {
            continue;
        }
        let frame = match parse_frame(&line) {
            Ok(f) => f,
            Err(e) => {
                let err = EngineError::Input {
                    line: i + 1,
                    source: Box::new(e.into()),
                };
                if policy == ErrorPolicy::Strict {
                    return Err(err);
                }
                log::warn!("{err}");
                engine.count_warning();
                continue;
            }
        };
        hook.before_frame(engine);
        match engine.step(&frame) {
            Ok(cmds) => send(sink, &cmds)?,
            Err(e @ EngineError::Gesture(GestureError::NonMonotonicTime { .. }))
                if policy == ErrorPolicy::Lenient =>
            {
                log::warn!("line {}: {e}", i + 1);
                engine.count_warning();
            }
            Err(e) => {
                return Err(EngineError::Input {
                    line: i + 1,
                    source: Box::new(e),
                })
            }
        }
        hook.after_frame(engine);
    }
    let tail = engine.finish();
    send(sink, &tail)?;
    sink.flush()
        .map_err(|e| EngineError::io("flushing sink", e))?;
    Ok(engine.stats())
}

/// Replays a fixture and returns the command log text.
pub fn replay_to_string<R: BufRead>(
    config: EngineConfig,
    templates: Vec<GestureTemplate>,
    fixture: R,
) -> Result<(String, RunStats), EngineError> {
    let mut engine = Engine::new(config, templates)?;
    let mut sink = command::LogSink::new(Vec::new());
    let stats = run_stream(
        &mut engine,
        fixture,
        &mut sink,
        ErrorPolicy::Lenient,
        &mut (),
    )?;
    let text = String::from_utf8(sink.into_inner()).expect("log lines are UTF-8");
    Ok((text, stats))
}

/// Builds a template from the pose frames of a fixture with
/// `from_ms <= t <= to_ms`.
pub fn record_from_fixture<R: BufRead>(
    fixture: R,
    from_ms: f64,
    to_ms: f64,
    name: &str,
    mode: TemplateMode,
    min_visibility: f64,
) -> Result<GestureTemplate, EngineError> {
    let mut samples = Vec::new();
    for (i, line) in fixture.lines().enumerate() {
        let line = line.map_err(|e| EngineError::io("reading fixture", e))?;
        if line.trim().is_empty() || is_header_record(&line) {
            continue;
        }
        let frame = parse_frame(&line).map_err(|e| EngineError::Input {
            line: i + 1,
            source: Box::new(e.into()),
        })?;
        if frame.t_ms < from_ms || frame.t_ms > to_ms {
            continue;
        }
        if let Some(pose) = &frame.pose {
            samples.push(extract_features(pose, frame.image, min_visibility));
        }
    }
    Ok(record_template(name, &samples, &TEMPLATE_FEATURES, mode)?)
}

/// Reads a configuration file (or the defaults when `path` is `None`) and
/// the template set it names. A relative template path is resolved against
/// the configuration file's directory.
pub fn load_session(
    path: Option<&std::path::Path>,
) -> Result<(EngineConfig, Vec<GestureTemplate>), EngineError> {
    let (cfg, base) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| EngineError::io(format!("reading {}", p.display()), e))?;
            let base = p
                .parent()
                .map(std::path::Path::to_path_buf)
                .unwrap_or_default();
            (config::load_config(&text)?, base)
        }
        None => (EngineConfig::default(), std::path::PathBuf::new()),
    };
    let templates = match &cfg.exercise.templates {
        Some(t) => {
            let full = base.join(t);
            let file = std::fs::File::open(&full)
                .map_err(|e| EngineError::io(format!("reading {}", full.display()), e))?;
            crate::exercise::read_templates(std::io::BufReader::new(file))
                .map_err(|e| crate::error::ConfigError::new("exercise.templates", e.to_string()))?
        }
        None => Vec::new(),
    };
    Ok((cfg, templates))
}

/// True if the event can lead to a command under some binding; used by the
/// idle-safety checks.
pub fn is_actionable(kind: &GestureKind) -> bool {
    !matches!(
        kind,
        GestureKind::IdleEnter { .. }
            | GestureKind::IdleExit { .. }
            | GestureKind::PoseChanged { .. }
    )
}
