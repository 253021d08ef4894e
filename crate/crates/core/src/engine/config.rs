//! Engine configuration: a TOML document mirroring [`EngineConfig`]. Every
//! field has a default, so an empty document is a valid configuration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::binding::{shipped_profile, ActionBinding, Profile};
use crate::error::ConfigError;
use crate::event::ModuleId;
use crate::exercise::{ExerciseConfig, UseMode};
use crate::face::HeadConfig;
use crate::gaze::{CameraModel, GazeConfig, ScreenGeometry};
use crate::hand::HandConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModuleFlags {
    pub hand: bool,
    pub head: bool,
    pub gaze: bool,
    pub exercise: bool,
}

impl Default for ModuleFlags {
    fn default() -> Self {
        ModuleFlags {
            hand: true,
            head: false,
            gaze: false,
            exercise: false,
        }
    }
}

impl ModuleFlags {
    pub fn all() -> Self {
        ModuleFlags {
            hand: true,
            head: true,
            gaze: true,
            exercise: true,
        }
    }

    pub fn only(module: ModuleId) -> Self {
        ModuleFlags {
            hand: module == ModuleId::Hand,
            head: module == ModuleId::Head,
            gaze: module == ModuleId::Gaze,
            exercise: module == ModuleId::Exercise,
        }
    }

    pub fn enabled(&self, module: ModuleId) -> bool {
        match module {
            ModuleId::Hand => self.hand,
            ModuleId::Head => self.head,
            ModuleId::Gaze => self.gaze,
            ModuleId::Exercise => self.exercise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default)]
    pub bindings: Vec<ActionBinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub modules: ModuleFlags,
    pub mode: UseMode,
    /// Frames whose resolved subject depth exceeds this are treated as empty.
    pub max_range_mm: f64,
    pub profile: String,
    /// Which module wins when several emit a cursor move in one frame.
    /// Modules not listed never drive the cursor.
    pub cursor_priority: Vec<ModuleId>,
    /// Default sink for `engine run`: `log:PATH` or `null`.
    pub sink: String,
    pub screen: ScreenGeometry,
    /// Calibrated intrinsics; when absent they are derived from the image size.
    pub camera: Option<CameraModel>,
    pub hand: HandConfig,
    pub head: HeadConfig,
    pub gaze: GazeConfig,
    pub exercise: ExerciseConfig,
    /// User profiles; a user profile named like a shipped one replaces it.
    pub profiles: BTreeMap<String, ProfileSpec>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            modules: ModuleFlags::default(),
            mode: UseMode::Sitting,
            max_range_mm: 2000.0,
            profile: "clinical".into(),
            cursor_priority: vec![ModuleId::Hand, ModuleId::Gaze, ModuleId::Head],
            sink: "null".into(),
            screen: ScreenGeometry::default(),
            camera: None,
            hand: HandConfig::default(),
            head: HeadConfig::default(),
            gaze: GazeConfig::default(),
            exercise: ExerciseConfig::default(),
            profiles: BTreeMap::new(),
        }
    }
}

fn section(r: Result<(), (String, String)>) -> Result<(), ConfigError> {
    r.map_err(|(f, m)| ConfigError::new(f, m))
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.max_range_mm > 0.0 && self.max_range_mm.is_finite()) {
            return Err(ConfigError::new("max_range_mm", "must be > 0"));
        }
        if !ModuleId::ALL.iter().any(|&m| self.modules.enabled(m)) {
            return Err(ConfigError::new(
                "modules",
                "at least one module must be enabled",
            ));
        }
        let mut seen = BTreeSet::new();
        for m in &self.cursor_priority {
            if !seen.insert(m) {
                return Err(ConfigError::new(
                    "cursor_priority",
                    format!("{} listed twice", m.as_str()),
                ));
            }
        }
        parse_sink(&self.sink).map_err(|m| ConfigError::new("sink", m))?;
        section(self.screen.validate())?;
        if let Some(cam) = &self.camera {
            cam.validate().map_err(|m| ConfigError::new("camera", m))?;
        }
        section(self.hand.validate())?;
        section(self.head.validate())?;
        section(self.gaze.validate())?;
        section(self.exercise.validate())?;
        for (name, spec) in &self.profiles {
            Profile::new(name, spec.bindings.clone())
                .map_err(|m| ConfigError::new(format!("profiles.{name}"), m))?;
        }
        self.resolve_profile(&self.profile)?;
        Ok(())
    }

    /// A user profile if one has this name, else a shipped one.
    pub fn resolve_profile(&self, name: &str) -> Result<Profile, ConfigError> {
        if let Some(spec) = self.profiles.get(name) {
            return Profile::new(name, spec.bindings.clone())
                .map_err(|m| ConfigError::new(format!("profiles.{name}"), m));
        }
        shipped_profile(name)
            .ok_or_else(|| ConfigError::new("profile", format!("unknown profile {name:?}")))
    }

    pub fn profile_names(&self) -> Vec<String> {
        let mut names: BTreeSet<String> = super::binding::SHIPPED_PROFILES
            .iter()
            .map(|s| s.to_string())
            .collect();
        names.extend(self.profiles.keys().cloned());
        names.into_iter().collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("config serializes to JSON")
    }

    /// Returns a copy with the value at a dotted path (e.g. `head.ear_on`)
    /// replaced. The path must name an existing field and the result must
    /// validate.
    pub fn with_path(&self, path: &str, value: Value) -> Result<EngineConfig, ConfigError> {
        let mut doc = self.to_json();
        let mut slot = &mut doc;
        for part in path.split('.') {
            slot = match slot {
                Value::Object(map) => map
                    .get_mut(part)
                    .ok_or_else(|| ConfigError::new(path, "no such field"))?,
                _ => return Err(ConfigError::new(path, "no such field")),
            };
        }
        *slot = value;
        let cfg: EngineConfig =
            serde_json::from_value(doc).map_err(|e| ConfigError::new(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Value at a dotted path, if it exists.
    pub fn get_path(&self, path: &str) -> Option<Value> {
        let mut v = &self.to_json();
        if path.is_empty() {
            return Some(v.clone());
        }
        for part in path.split('.') {
            v = v.get(part)?;
        }
        Some(v.clone())
    }
}

/// Parses and validates a configuration document.
pub fn load_config(document: &str) -> Result<EngineConfig, ConfigError> {
    let cfg: EngineConfig = toml::from_str(document)
        .map_err(|e| ConfigError::new("document", e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SinkSpec {
    Null,
    Log(String),
}

pub fn parse_sink(spec: &str) -> Result<SinkSpec, String> {
    match spec {
        "null" => Ok(SinkSpec::Null),
        _ => match spec.strip_prefix("log:") {
            Some(path) if !path.is_empty() => Ok(SinkSpec::Log(path.to_string())),
            _ => Err(format!("expected log:PATH or null, got {spec:?}")),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn empty_document_is_defaults() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg, EngineConfig::default());
        assert!(cfg.modules.hand);
        assert_eq!(cfg.mode, UseMode::Sitting);
        assert_eq!(cfg.max_range_mm, 2000.0);
    }

    #[test]
    fn negative_range_names_field() {
        let e = load_config("max_range_mm = -1").unwrap_err();
        assert_eq!(e.field, "max_range_mm");
        assert_eq!(e.to_string(), "max_range_mm: must be > 0");
    }

    #[test]
    fn unknown_profile_rejected() {
        assert_eq!(
            load_config("profile = \"office\"").unwrap_err().field,
            "profile"
        );
        let ok = load_config(
            r#"
            profile = "office"
            [[profiles.office.bindings]]
            on = "blink"
            action = "key_tap"
            key = "enter"
            "#,
        )
        .unwrap();
        assert_eq!(ok.resolve_profile("office").unwrap().bindings().len(), 1);
    }

    #[test]
    fn sections_and_unknown_fields() {
        let cfg = load_config("[head]\near_on = 0.22\n[modules]\nhead = true").unwrap();
        assert_eq!(cfg.head.ear_on, 0.22);
        assert!(cfg.modules.head);
        assert!(load_config("[hand]\npinch_onn = 0.3").is_err());
        assert_eq!(
            load_config("[modules]\nhand = false").unwrap_err().field,
            "modules"
        );
        assert_eq!(
            load_config("[hand]\npinch_on = 0.5").unwrap_err().field,
            "hand.pinch_on"
        );
    }

    #[test]
    fn default_toml_round_trips() {
        let text = EngineConfig::default().to_toml();
        assert_eq!(load_config(&text).unwrap(), EngineConfig::default());
    }

    #[test]
    fn set_by_path() {
        let cfg = EngineConfig::default();
        let next = cfg.with_path("head.ear_on", json!(0.22)).unwrap();
        assert_eq!(next.head.ear_on, 0.22);
        assert_eq!(
            cfg.with_path("head.ear_onn", json!(0.22))
                .unwrap_err()
                .field,
            "head.ear_onn"
        );
        assert!(cfg.with_path("head.ear_on", json!("x")).is_err());
        assert_eq!(
            cfg.with_path("head.ear_on", json!(0.3)).unwrap_err().field,
            "head.ear_on"
        );
        assert_eq!(cfg.get_path("head.ear_on"), Some(json!(0.2)));
        assert_eq!(cfg.get_path("nope"), None);
    }

    #[test]
    fn sink_specs() {
        assert_eq!(parse_sink("null"), Ok(SinkSpec::Null));
        assert_eq!(
            parse_sink("log:out.ndjson"),
            Ok(SinkSpec::Log("out.ndjson".into()))
        );
        assert!(parse_sink("log:").is_err());
        assert!(parse_sink("tcp://x").is_err());
    }
}
