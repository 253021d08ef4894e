//! Control protocol round trip: an engine replays the squat fixture with a
//! control socket, and a client reads a value, changes it, switches profile
//! and watches telemetry.
//!
//! cargo run --example control_client

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};
use touchless::engine::command::NullSink;
use touchless::engine::config::load_config;
use touchless::engine::control::{serve_control, ControlHub};
use touchless::engine::{run_stream, Engine, ErrorPolicy, FrameHook};
use touchless::scenario;

/// Paces the replay like a live camera so the client can interleave.
struct Paced(ControlHub);

impl FrameHook for Paced {
    fn before_frame(&mut self, engine: &mut Engine) {
        self.0.before_frame(engine);
    }

    fn after_frame(&mut self, engine: &mut Engine) {
        self.0.after_frame(engine);
        thread::sleep(Duration::from_millis(5));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let s = scenario::squat_reps();
    let cfg = load_config(s.config)?;
    let hub = ControlHub::new(cfg.clone());
    let addr = serve_control(hub.clone(), 0)?;
    let mut client = TcpStream::connect(addr)?;
    let mut replies = BufReader::new(client.try_clone()?).lines();
    while hub.client_count() == 0 {
        thread::sleep(Duration::from_millis(1));
    }

    let text = s.to_ndjson();
    let engine_thread = thread::spawn(move || {
        let mut engine = Engine::new(cfg, Vec::new()).expect("engine");
        run_stream(
            &mut engine,
            text.as_bytes(),
            &mut NullSink,
            ErrorPolicy::Strict,
            &mut Paced(hub),
        )
        .expect("run")
    });

    for msg in [
        json!({"type": "get", "id": 1, "path": "exercise.squat_down_deg"}),
        json!({"type": "set", "id": 2, "path": "exercise.squat_down_deg", "value": 95.0}),
        json!({"type": "set", "id": 3, "path": "exercise.squat_down_deg", "value": 170.0}),
        json!({"type": "profile", "id": 4, "name": "clinical"}),
    ] {
        writeln!(client, "{msg}")?;
        for line in replies.by_ref() {
            let v: Value = serde_json::from_str(&line?)?;
            if v["type"] != "telemetry" {
                println!("> {msg}\n< {v}");
                break;
            }
        }
    }
    let mut last = Value::Null;
    let mut count = 0;
    for line in replies.by_ref().take(60) {
        last = serde_json::from_str(&line?)?;
        count += 1;
    }
    println!(
        "{count} telemetry frames; latest frame {} epoch {} profile {}",
        last["frame"], last["epoch"], last["profile"]
    );
    drop(client);
    let stats = engine_thread.join().expect("engine thread");
    println!("engine processed {} frames", stats.frames);
    Ok(())
}
