//! Touchless input from body landmarks.
//!
//! A landmark provider streams per-frame hand, face and pose landmarks as
//! NDJSON. This crate turns them into semantic gesture events (hand cursor
//! and pinch click, blink and head triggers, gaze pointing, exercise
//! repetitions) and maps those events onto keyboard and mouse commands
//! through switchable binding profiles.

// validation is written as `!(x > 0.0)` on purpose so that NaN fails it
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod event;
pub mod exercise;
pub mod face;
pub mod gaze;
pub mod geometry;
pub mod hand;
pub mod model;
pub mod scenario;
pub mod signal;
pub mod synth;

pub use error::{ConfigError, EngineError, FrameError, GestureError};
pub use event::{EventSelector, GestureEvent, GestureKind, ModuleId};
pub use model::{
    parse_frame, serialize_frame, HandFrame, Handedness, ImageDims, LandmarkFrame, Point2, Point3,
};
