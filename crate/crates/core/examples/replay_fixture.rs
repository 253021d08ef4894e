//! Replays a recorded fixture under a config file and prints the command
//! log, the same as `engine replay` without the output file.
//!
//! cargo run --example replay_fixture [-- FIXTURE.ndjson [CONFIG.toml]]

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use touchless::engine::{load_session, replay_to_string};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut args = std::env::args().skip(1);
    let fixture = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| dir.join("squat_reps.ndjson"));
    let config = args.next().map(PathBuf::from).or_else(|| {
        let stem = fixture.file_stem()?.to_str()?.to_string();
        Some(dir.join("configs").join(format!("{stem}.toml"))).filter(|p| p.exists())
    });
    let (cfg, templates) = load_session(config.as_deref())?;
    let (log, stats) = replay_to_string(cfg, templates, BufReader::new(File::open(&fixture)?))?;
    print!("{log}");
    eprintln!("{}", serde_json::to_string(&stats)?);
    Ok(())
}
