//! Regenerates the shipped fixtures, their configs and the expected command
//! logs under `fixtures/` (or the directory given as the first argument).
//!
//! cargo run --example generate_fixtures [-- DIR]

use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use touchless::engine::config::{load_config, EngineConfig};
use touchless::engine::{record_from_fixture, replay_to_string};
use touchless::exercise::template::write_template;
use touchless::exercise::TemplateMode;
use touchless::scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    fs::create_dir_all(dir.join("configs"))?;

    for s in scenario::shipped() {
        let text = s.to_ndjson();
        fs::write(dir.join(format!("{}.ndjson", s.name)), &text)?;
        fs::write(
            dir.join("configs").join(format!("{}.toml", s.name)),
            s.config,
        )?;
        let (log, stats) = replay_to_string(load_config(s.config)?, Vec::new(), text.as_bytes())?;
        fs::write(dir.join(format!("{}.expected.ndjson", s.name)), &log)?;
        println!(
            "{:<16} {:>4} frames {:>4} commands",
            s.name, stats.frames, stats.commands
        );
    }

    let defaults = format!(
        "# Every field with its default value. An empty file is equivalent.\n\
         # Optional keys without a default:\n\
         #   camera = {{ f_px = 1280.0, cx = 640.0, cy = 360.0 }}  calibrated intrinsics\n\
         #   [exercise] templates = \"templates.ndjson\"          relative to this file\n\n{}",
        EngineConfig::default().to_toml()
    );
    fs::write(dir.join("configs").join("default.toml"), defaults)?;

    // the bottom of the second squat, as a hold template
    let squat = fs::File::open(dir.join("squat_reps.ndjson"))?;
    let t = record_from_fixture(
        BufReader::new(squat),
        2800.0,
        3200.0,
        "squat_hold",
        TemplateMode::Hold,
        0.5,
    )?;
    let mut out = Vec::new();
    write_template(&mut out, &t)?;
    fs::write(dir.join("templates.ndjson"), out)?;
    Ok(())
}
