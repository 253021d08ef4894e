//! Binding profiles: declarative rules from gesture events to input actions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::command::{round_to, Command, MouseButton};
use crate::event::{EventSelector, GestureEvent, GestureKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ButtonAction {
    Press,
    Release,
    Click,
    Double,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    KeyTap {
        key: String,
    },
    /// Down on the bound event, up on its release partner.
    KeyHold {
        key: String,
    },
    MouseButton {
        button: MouseButton,
        press: ButtonAction,
    },
    /// Wheel delta = scale times the scroll payload (or scale for events
    /// without one).
    Wheel {
        scale: f64,
    },
    CursorAbsolute,
    CursorRelative {
        gain: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBinding {
    pub on: EventSelector,
    #[serde(flatten)]
    pub action: Action,
}

impl ActionBinding {
    pub fn new(on: EventSelector, action: Action) -> Self {
        ActionBinding { on, action }
    }
}

/// A validated set of bindings, at most one per selector.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    name: String,
    bindings: Vec<ActionBinding>,
    by_selector: BTreeMap<EventSelector, Action>,
    /// Release partner of each KeyHold binding, mapped to its key.
    hold_releases: BTreeMap<EventSelector, String>,
}

impl Profile {
    pub fn new(name: &str, bindings: Vec<ActionBinding>) -> Result<Profile, String> {
        let mut by_selector = BTreeMap::new();
        let mut hold_releases = BTreeMap::new();
        for b in &bindings {
            if by_selector.insert(b.on.clone(), b.action.clone()).is_some() {
                return Err(format!("profile {name:?}: {} is bound twice", b.on));
            }
            match &b.action {
                Action::KeyHold { key } => {
                    let partner = b.on.release_partner().ok_or_else(|| {
                        format!(
                            "profile {name:?}: key_hold needs an on/off event, got {}",
                            b.on
                        )
                    })?;
                    hold_releases.insert(partner, key.clone());
                }
                Action::CursorAbsolute | Action::CursorRelative { .. }
                    if b.on != EventSelector::CursorMove =>
                {
                    return Err(format!(
                        "profile {name:?}: cursor actions bind only to cursor_move"
                    ));
                }
                Action::CursorRelative { gain } if !gain.is_finite() => {
                    return Err(format!("profile {name:?}: cursor gain must be finite"));
                }
                Action::Wheel { scale } if !scale.is_finite() => {
                    return Err(format!("profile {name:?}: wheel scale must be finite"));
                }
                Action::KeyTap { key } if key.is_empty() => {
                    return Err(format!("profile {name:?}: empty key"));
                }
                _ => {}
            }
            if b.on == EventSelector::CursorMove
                && !matches!(
                    b.action,
                    Action::CursorAbsolute | Action::CursorRelative { .. }
                )
            {
                return Err(format!(
                    "profile {name:?}: cursor_move binds only to a cursor action"
                ));
            }
        }
        for partner in hold_releases.keys() {
            if by_selector.contains_key(partner) {
                return Err(format!(
                    "profile {name:?}: {partner} is already released by a key_hold binding"
                ));
            }
        }
        Ok(Profile {
            name: name.to_string(),
            bindings,
            by_selector,
            hold_releases,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bindings(&self) -> &[ActionBinding] {
        &self.bindings
    }

    pub fn action_for(&self, selector: &EventSelector) -> Option<&Action> {
        self.by_selector.get(selector)
    }
}

fn button_commands(button: MouseButton, press: ButtonAction) -> Vec<Command> {
    match press {
        ButtonAction::Press => vec![Command::MouseDown(button)],
        ButtonAction::Release => vec![Command::MouseUp(button)],
        ButtonAction::Click => vec![Command::MouseDown(button), Command::MouseUp(button)],
        ButtonAction::Double => vec![
            Command::MouseDown(button),
            Command::MouseUp(button),
            Command::MouseDown(button),
            Command::MouseUp(button),
        ],
    }
}

/// Translates one event under `profile`. Pure; unbound events give nothing.
pub fn bind(event: &GestureEvent, profile: &Profile) -> Vec<Command> {
    let selector = EventSelector::of(&event.kind);
    if let Some(key) = profile.hold_releases.get(&selector) {
        return vec![Command::KeyUp(key.clone())];
    }
    let Some(action) = profile.action_for(&selector) else {
        return Vec::new();
    };
    match action {
        Action::KeyTap { key } => vec![Command::KeyDown(key.clone()), Command::KeyUp(key.clone())],
        Action::KeyHold { key } => vec![Command::KeyDown(key.clone())],
        Action::MouseButton { button, press } => button_commands(*button, *press),
        Action::Wheel { scale } => {
            let amount = match event.kind {
                GestureKind::Scroll { delta } => delta,
                _ => 1.0,
            };
            vec![Command::Wheel(round_to(amount * scale, 3))]
        }
        Action::CursorAbsolute => match event.kind {
            GestureKind::CursorMove { x, y, .. } => vec![Command::MouseMoveAbs {
                x: x.round() as i32,
                y: y.round() as i32,
            }],
            _ => Vec::new(),
        },
        Action::CursorRelative { gain } => match event.kind {
            GestureKind::CursorMove { dx, dy, .. } => vec![Command::MouseMoveRel {
                dx: round_to(dx * gain, 2),
                dy: round_to(dy * gain, 2),
            }],
            _ => Vec::new(),
        },
    }
}

fn key_tap(on: EventSelector, key: &str) -> ActionBinding {
    ActionBinding::new(on, Action::KeyTap { key: key.into() })
}

fn button(on: EventSelector, button: MouseButton, press: ButtonAction) -> ActionBinding {
    ActionBinding::new(on, Action::MouseButton { button, press })
}

fn pointer_bindings() -> Vec<ActionBinding> {
    vec![
        ActionBinding::new(EventSelector::CursorMove, Action::CursorAbsolute),
        button(
            EventSelector::PinchPress,
            MouseButton::Left,
            ButtonAction::Press,
        ),
        button(
            EventSelector::PinchRelease,
            MouseButton::Left,
            ButtonAction::Release,
        ),
    ]
}

pub const SHIPPED_PROFILES: [&str; 3] = ["gaming", "creativity", "clinical"];

/// The built-in profiles.
pub fn shipped_profile(name: &str) -> Option<Profile> {
    use EventSelector as E;
    let bindings = match name {
        "gaming" => {
            let mut b = vec![
                ActionBinding::new(
                    E::Activate("cycling".into()),
                    Action::KeyHold { key: "w".into() },
                ),
                key_tap(E::SquatRep, "s"),
                key_tap(E::PunchLeft, "a"),
                key_tap(E::PunchRight, "d"),
                key_tap(E::JumpRep, "space"),
                key_tap(E::KickLeft, "q"),
                key_tap(E::KickRight, "e"),
            ];
            b.extend(pointer_bindings());
            b
        }
        "creativity" => {
            let mut b = pointer_bindings();
            b.extend([
                button(E::MouthOpen, MouseButton::Left, ButtonAction::Press),
                button(E::MouthClose, MouseButton::Left, ButtonAction::Release),
                button(E::WinkLeft, MouseButton::Left, ButtonAction::Click),
                button(E::WinkRight, MouseButton::Right, ButtonAction::Click),
                ActionBinding::new(E::Scroll, Action::Wheel { scale: 1.0 }),
            ]);
            b
        }
        "clinical" => {
            let mut b = pointer_bindings();
            b.extend([
                ActionBinding::new(E::Scroll, Action::Wheel { scale: 1.0 }),
                button(E::WinkLeft, MouseButton::Left, ButtonAction::Click),
                button(E::MouthOpen, MouseButton::Left, ButtonAction::Double),
                button(E::ProfileLeft, MouseButton::Left, ButtonAction::Click),
                button(E::ProfileRight, MouseButton::Right, ButtonAction::Click),
            ]);
            b
        }
        _ => return None,
    };
    Some(Profile::new(name, bindings).expect("shipped profiles are valid"))
}
