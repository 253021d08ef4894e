use thiserror::Error;

/// Errors raised while decoding a landmark record.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("malformed record: {0}")]
    MalformedRecord(String),
    #[error("schema violation: {field}: {reason}")]
    SchemaViolation { field: String, reason: String },
}

impl FrameError {
    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FrameError::SchemaViolation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Field path named by a schema violation, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            FrameError::SchemaViolation { field, .. } => Some(field),
            FrameError::MalformedRecord(_) => None,
        }
    }
}

/// Geometry and state-machine errors shared by the gesture modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GestureError {
    #[error("timestamp {t_ms} ms does not advance past {prev_ms} ms")]
    NonMonotonicTime { prev_ms: f64, t_ms: f64 },
    #[error("degenerate hand: {0}")]
    DegenerateHand(&'static str),
    #[error("degenerate eye: horizontal span is zero")]
    DegenerateEye,
    #[error("degenerate mouth: mouth width is zero")]
    DegenerateMouth,
    #[error("degenerate face: {0}")]
    DegenerateFace(&'static str),
    #[error("degenerate iris: boundary points coincide")]
    DegenerateIris,
    #[error("degenerate joint: zero-length segment")]
    DegenerateJoint,
    #[error("template {0:?} shares no features with the frame")]
    EmptyTemplate(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
}

/// Configuration validation failure, naming the offending field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Errors surfaced by the engine loop.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("line {line}: {source}")]
    Input {
        line: usize,
        #[source]
        source: Box<EngineError>,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl EngineError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        EngineError::Io {
            context: context.into(),
            source,
        }
    }
}
