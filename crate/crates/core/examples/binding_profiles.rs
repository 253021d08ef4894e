//! Binding profiles: what the shipped profiles do with a few events, and a
//! user-defined profile loaded from TOML.
//!
//! cargo run --example binding_profiles

use touchless::engine::binding::{bind, shipped_profile, SHIPPED_PROFILES};
use touchless::engine::config::load_config;
use touchless::{GestureEvent, GestureKind, ModuleId};

const CUSTOM: &str = r#"
profile = "reader"

[[profiles.reader.bindings]]
on = "profile_left"
action = "key_tap"
key = "left"

[[profiles.reader.bindings]]
on = "profile_right"
action = "key_tap"
key = "right"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let events = [
        GestureEvent::new(0.0, ModuleId::Hand, GestureKind::PinchPress),
        GestureEvent::new(0.0, ModuleId::Head, GestureKind::WinkLeft),
        GestureEvent::new(0.0, ModuleId::Head, GestureKind::ProfileRight),
        GestureEvent::new(0.0, ModuleId::Exercise, GestureKind::SquatRep { count: 1 }),
        GestureEvent::new(
            0.0,
            ModuleId::Exercise,
            GestureKind::Activate {
                label: "cycling".into(),
                confidence: 1.0,
            },
        ),
    ];
    for name in SHIPPED_PROFILES {
        let profile = shipped_profile(name).expect("shipped");
        println!("-- {name}");
        for e in &events {
            println!(
                "  {:<28} -> {:?}",
                format!("{:?}", e.kind),
                bind(e, &profile)
            );
        }
    }

    let cfg = load_config(CUSTOM)?;
    let reader = cfg.resolve_profile(&cfg.profile)?;
    println!(
        "-- {} (from TOML), profiles available: {:?}",
        reader.name(),
        cfg.profile_names()
    );
    println!("  ProfileRight -> {:?}", bind(&events[2], &reader));
    Ok(())
}
