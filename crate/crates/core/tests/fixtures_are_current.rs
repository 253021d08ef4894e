//! The files under `fixtures/` are generated by
//! `cargo run --example generate_fixtures`; these checks fail when the
//! generators and the files drift apart.

mod common;

use std::fs;
use std::io::BufReader;

use common::fixtures;
use touchless::engine::config::EngineConfig;
use touchless::engine::record_from_fixture;
use touchless::exercise::{read_templates, TemplateMode};
use touchless::scenario;

#[test]
fn fixture_frames_and_configs_match_their_generators() {
    let dir = fixtures();
    for s in scenario::shipped() {
        let on_disk = fs::read_to_string(dir.join(format!("{}.ndjson", s.name))).unwrap();
        assert!(on_disk == s.to_ndjson(), "{}.ndjson is stale", s.name);
        let config =
            fs::read_to_string(dir.join("configs").join(format!("{}.toml", s.name))).unwrap();
        assert_eq!(config, s.config, "{}.toml is stale", s.name);
    }
}

#[test]
fn default_config_lists_every_default() {
    let text = fs::read_to_string(fixtures().join("configs").join("default.toml")).unwrap();
    assert!(text.ends_with(&EngineConfig::default().to_toml()));
}

#[test]
fn shipped_template_matches_a_fresh_recording() {
    let squat = BufReader::new(fs::File::open(fixtures().join("squat_reps.ndjson")).unwrap());
    let fresh =
        record_from_fixture(squat, 2800.0, 3200.0, "squat_hold", TemplateMode::Hold, 0.5).unwrap();
    let shipped = read_templates(BufReader::new(
        fs::File::open(fixtures().join("templates.ndjson")).unwrap(),
    ))
    .unwrap();
    assert_eq!(shipped, vec![fresh]);
}
