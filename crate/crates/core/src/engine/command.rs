//! Low-level input commands and the sinks that consume them.
//!
//! The log sink writes one NDJSON record per command with keys in the fixed
//! order `t, cmd, key, button, x, y, delta` (absent keys omitted). That byte
//! format is what the golden tests compare.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MouseButton {
    Left,
    Right,
    Middle,
}

impl MouseButton {
    pub fn as_str(self) -> &'static str {
        match self {
            MouseButton::Left => "left",
            MouseButton::Right => "right",
            MouseButton::Middle => "middle",
        }
    }
}

impl FromStr for MouseButton {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(MouseButton::Left),
            "right" => Ok(MouseButton::Right),
            "middle" => Ok(MouseButton::Middle),
            other => Err(format!("unknown mouse button {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    KeyDown(String),
    KeyUp(String),
    /// Integer screen pixels.
    MouseMoveAbs {
        x: i32,
        y: i32,
    },
    MouseMoveRel {
        dx: f64,
        dy: f64,
    },
    MouseDown(MouseButton),
    MouseUp(MouseButton),
    /// Positive scrolls up.
    Wheel(f64),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KeyDown(_) => "key_down",
            Command::KeyUp(_) => "key_up",
            Command::MouseMoveAbs { .. } => "mouse_move_abs",
            Command::MouseMoveRel { .. } => "mouse_move_rel",
            Command::MouseDown(_) => "mouse_down",
            Command::MouseUp(_) => "mouse_up",
            Command::Wheel(_) => "wheel",
        }
    }

    pub fn is_cursor(&self) -> bool {
        matches!(
            self,
            Command::MouseMoveAbs { .. } | Command::MouseMoveRel { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputCommand {
    pub t_ms: f64,
    pub cmd: Command,
}

impl InputCommand {
    pub fn new(t_ms: f64, cmd: Command) -> Self {
        InputCommand { t_ms, cmd }
    }

    pub fn to_value(&self) -> Value {
        let mut m = Map::new();
        m.insert("t".into(), json!(self.t_ms));
        m.insert("cmd".into(), json!(self.cmd.name()));
        match &self.cmd {
            Command::KeyDown(k) | Command::KeyUp(k) => {
                m.insert("key".into(), json!(k));
            }
            Command::MouseDown(b) | Command::MouseUp(b) => {
                m.insert("button".into(), json!(b.as_str()));
            }
            Command::MouseMoveAbs { x, y } => {
                m.insert("x".into(), json!(x));
                m.insert("y".into(), json!(y));
            }
            Command::MouseMoveRel { dx, dy } => {
                m.insert("x".into(), json!(dx));
                m.insert("y".into(), json!(dy));
            }
            Command::Wheel(d) => {
                m.insert("delta".into(), json!(d));
            }
        }
        Value::Object(m)
    }

    pub fn to_log_line(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_log_line(line: &str) -> Result<Self, String> {
        let v: Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let t_ms = v["t"].as_f64().ok_or("missing t")?;
        let str_field = |k: &str| {
            v[k].as_str()
                .map(str::to_string)
                .ok_or(format!("missing {k}"))
        };
        let num = |k: &str| v[k].as_f64().ok_or(format!("missing {k}"));
        let int = |k: &str| {
            v[k].as_i64()
                .and_then(|i| i32::try_from(i).ok())
                .ok_or(format!("missing {k}"))
        };
        let cmd = match v["cmd"].as_str().ok_or("missing cmd")? {
            "key_down" => Command::KeyDown(str_field("key")?),
            "key_up" => Command::KeyUp(str_field("key")?),
            "mouse_down" => Command::MouseDown(str_field("button")?.parse()?),
            "mouse_up" => Command::MouseUp(str_field("button")?.parse()?),
            "mouse_move_abs" => Command::MouseMoveAbs {
                x: int("x")?,
                y: int("y")?,
            },
            "mouse_move_rel" => Command::MouseMoveRel {
                dx: num("x")?,
                dy: num("y")?,
            },
            "wheel" => Command::Wheel(num("delta")?),
            other => return Err(format!("unknown cmd {other:?}")),
        };
        Ok(InputCommand { t_ms, cmd })
    }
}

impl fmt::Display for InputCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_log_line())
    }
}

/// Anything that accepts the ordered command stream. An OS input injector
/// implements this trait; the crate ships the log, null and memory sinks.
pub trait CommandSink {
    fn send(&mut self, cmd: &InputCommand) -> io::Result<()>;

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

/// Writes the NDJSON command log.
pub struct LogSink<W: Write> {
    out: W,
}

impl<W: Write> LogSink<W> {
    pub fn new(out: W) -> Self {
        LogSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> CommandSink for LogSink<W> {
    fn send(&mut self, cmd: &InputCommand) -> io::Result<()> {
        writeln!(self.out, "{}", cmd.to_log_line())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

#[derive(Debug, Default)]
pub struct NullSink;

impl CommandSink for NullSink {
    fn send(&mut self, _cmd: &InputCommand) -> io::Result<()> {
        Ok(())
    }
}

#[derive(Debug, Default)]
pub struct MemorySink {
    pub commands: Vec<InputCommand>,
}

impl CommandSink for MemorySink {
    fn send(&mut self, cmd: &InputCommand) -> io::Result<()> {
        self.commands.push(cmd.clone());
        Ok(())
    }
}

impl<S: CommandSink + ?Sized> CommandSink for Box<S> {
    fn send(&mut self, cmd: &InputCommand) -> io::Result<()> {
        (**self).send(cmd)
    }

    fn flush(&mut self) -> io::Result<()> {
        (**self).flush()
    }
}

/// Rounds to a fixed number of decimals so logged values are stable.
pub(crate) fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    let r = (v * s).round() / s;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Per-key and per-button count of downs minus ups; a balanced log has all
/// zeros.
pub fn hold_balance(commands: &[InputCommand]) -> std::collections::BTreeMap<String, i64> {
    let mut bal = std::collections::BTreeMap::new();
    for c in commands {
        let (name, d) = match &c.cmd {
            Command::KeyDown(k) => (format!("key:{k}"), 1),
            Command::KeyUp(k) => (format!("key:{k}"), -1),
            Command::MouseDown(b) => (format!("button:{}", b.as_str()), 1),
            Command::MouseUp(b) => (format!("button:{}", b.as_str()), -1),
            _ => continue,
        };
        *bal.entry(name).or_insert(0) += d;
    }
    bal
}
