//! Semantic gesture events produced by the modules and consumed by bindings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::Handedness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModuleId {
    Hand,
    Head,
    Gaze,
    Exercise,
}

impl ModuleId {
    pub const ALL: [ModuleId; 4] = [
        ModuleId::Hand,
        ModuleId::Head,
        ModuleId::Gaze,
        ModuleId::Exercise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModuleId::Hand => "hand",
            ModuleId::Head => "head",
            ModuleId::Gaze => "gaze",
            ModuleId::Exercise => "exercise",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GestureKind {
    /// Absolute cursor target in screen pixels plus the delta from the
    /// module's previous cursor position.
    CursorMove {
        x: f64,
        y: f64,
        dx: f64,
        dy: f64,
    },
    PinchPress,
    PinchRelease,
    Blink,
    WinkLeft,
    WinkRight,
    MouthOpen,
    MouthClose,
    ProfileLeft,
    ProfileRight,
    /// Positive scrolls up.
    Scroll {
        delta: f64,
    },
    SquatRep {
        count: u64,
    },
    JumpRep {
        count: u64,
    },
    PunchLeft,
    PunchRight,
    KickLeft,
    KickRight,
    CycleRep {
        count: u64,
    },
    Activate {
        label: String,
        confidence: f64,
    },
    Deactivate {
        label: String,
    },
    TemplateRep {
        label: String,
        confidence: f64,
    },
    IdleEnter {
        hand: Handedness,
    },
    IdleExit {
        hand: Handedness,
    },
    PoseChanged {
        hand: Handedness,
        label: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GestureEvent {
    pub t_ms: f64,
    pub source: ModuleId,
    #[serde(flatten)]
    pub kind: GestureKind,
}

impl GestureEvent {
    pub fn new(t_ms: f64, source: ModuleId, kind: GestureKind) -> Self {
        GestureEvent { t_ms, source, kind }
    }

    pub fn is_cursor_move(&self) -> bool {
        matches!(self.kind, GestureKind::CursorMove { .. })
    }
}

/// What a binding listens for: an event kind plus, for labelled kinds, the
/// label. Written as `pinch_press`, `activate:cycling`, `pose_changed:fist`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventSelector {
    CursorMove,
    PinchPress,
    PinchRelease,
    Blink,
    WinkLeft,
    WinkRight,
    MouthOpen,
    MouthClose,
    ProfileLeft,
    ProfileRight,
    Scroll,
    SquatRep,
    JumpRep,
    PunchLeft,
    PunchRight,
    KickLeft,
    KickRight,
    CycleRep,
    Activate(String),
    Deactivate(String),
    TemplateRep(String),
    IdleEnter,
    IdleExit,
    PoseChanged(String),
}

impl EventSelector {
    pub fn of(kind: &GestureKind) -> EventSelector {
        use GestureKind as K;
        match kind {
            K::CursorMove { .. } => EventSelector::CursorMove,
            K::PinchPress => EventSelector::PinchPress,
            K::PinchRelease => EventSelector::PinchRelease,
            K::Blink => EventSelector::Blink,
            K::WinkLeft => EventSelector::WinkLeft,
            K::WinkRight => EventSelector::WinkRight,
            K::MouthOpen => EventSelector::MouthOpen,
            K::MouthClose => EventSelector::MouthClose,
            K::ProfileLeft => EventSelector::ProfileLeft,
            K::ProfileRight => EventSelector::ProfileRight,
            K::Scroll { .. } => EventSelector::Scroll,
            K::SquatRep { .. } => EventSelector::SquatRep,
            K::JumpRep { .. } => EventSelector::JumpRep,
            K::PunchLeft => EventSelector::PunchLeft,
            K::PunchRight => EventSelector::PunchRight,
            K::KickLeft => EventSelector::KickLeft,
            K::KickRight => EventSelector::KickRight,
            K::CycleRep { .. } => EventSelector::CycleRep,
            K::Activate { label, .. } => EventSelector::Activate(label.clone()),
            K::Deactivate { label } => EventSelector::Deactivate(label.clone()),
            K::TemplateRep { label, .. } => EventSelector::TemplateRep(label.clone()),
            K::IdleEnter { .. } => EventSelector::IdleEnter,
            K::IdleExit { .. } => EventSelector::IdleExit,
            K::PoseChanged { label, .. } => EventSelector::PoseChanged(label.clone()),
        }
    }

    /// For the "on" half of an on/off pair, the selector that ends it.
    pub fn release_partner(&self) -> Option<EventSelector> {
        match self {
            EventSelector::Activate(l) => Some(EventSelector::Deactivate(l.clone())),
            EventSelector::PinchPress => Some(EventSelector::PinchRelease),
            EventSelector::MouthOpen => Some(EventSelector::MouthClose),
            EventSelector::IdleExit => Some(EventSelector::IdleEnter),
            _ => None,
        }
    }
}

impl fmt::Display for EventSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let simple = match self {
            EventSelector::CursorMove => "cursor_move",
            EventSelector::PinchPress => "pinch_press",
            EventSelector::PinchRelease => "pinch_release",
            EventSelector::Blink => "blink",
            EventSelector::WinkLeft => "wink_left",
            EventSelector::WinkRight => "wink_right",
            EventSelector::MouthOpen => "mouth_open",
            EventSelector::MouthClose => "mouth_close",
            EventSelector::ProfileLeft => "profile_left",
            EventSelector::ProfileRight => "profile_right",
            EventSelector::Scroll => "scroll",
            EventSelector::SquatRep => "squat_rep",
            EventSelector::JumpRep => "jump_rep",
            EventSelector::PunchLeft => "punch_left",
            EventSelector::PunchRight => "punch_right",
            EventSelector::KickLeft => "kick_left",
            EventSelector::KickRight => "kick_right",
            EventSelector::CycleRep => "cycle_rep",
            EventSelector::IdleEnter => "idle_enter",
            EventSelector::IdleExit => "idle_exit",
            EventSelector::Activate(l) => return write!(f, "activate:{l}"),
            EventSelector::Deactivate(l) => return write!(f, "deactivate:{l}"),
            EventSelector::TemplateRep(l) => return write!(f, "template_rep:{l}"),
            EventSelector::PoseChanged(l) => return write!(f, "pose_changed:{l}"),
        };
        f.write_str(simple)
    }
}

impl FromStr for EventSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some((kind, label)) = s.split_once(':') {
            if label.is_empty() {
                return Err(format!("selector {s:?} has an empty label"));
            }
            let label = label.to_string();
            return match kind {
                "activate" => Ok(EventSelector::Activate(label)),
                "deactivate" => Ok(EventSelector::Deactivate(label)),
                "template_rep" => Ok(EventSelector::TemplateRep(label)),
                "pose_changed" => Ok(EventSelector::PoseChanged(label)),
                _ => Err(format!("unknown labelled selector {kind:?}")),
            };
        }
        Ok(match s {
            "cursor_move" => EventSelector::CursorMove,
            "pinch_press" => EventSelector::PinchPress,
            "pinch_release" => EventSelector::PinchRelease,
            "blink" => EventSelector::Blink,
            "wink_left" => EventSelector::WinkLeft,
            "wink_right" => EventSelector::WinkRight,
            "mouth_open" => EventSelector::MouthOpen,
            "mouth_close" => EventSelector::MouthClose,
            "profile_left" => EventSelector::ProfileLeft,
            "profile_right" => EventSelector::ProfileRight,
            "scroll" => EventSelector::Scroll,
            "squat_rep" => EventSelector::SquatRep,
            "jump_rep" => EventSelector::JumpRep,
            "punch_left" => EventSelector::PunchLeft,
            "punch_right" => EventSelector::PunchRight,
            "kick_left" => EventSelector::KickLeft,
            "kick_right" => EventSelector::KickRight,
            "cycle_rep" => EventSelector::CycleRep,
            "idle_enter" => EventSelector::IdleEnter,
            "idle_exit" => EventSelector::IdleExit,
            other => return Err(format!("unknown selector {other:?}")),
        })
    }
}

impl Serialize for EventSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EventSelector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
