//! Exercise module: squat repetitions standing, then pedalling seated,
//! with the per-label session totals.
//!
//! cargo run --example exercise_reps

use touchless::exercise::{ExerciseConfig, ExerciseModule, UseMode};
use touchless::scenario::{self, VGA};

fn run(
    name: &str,
    mode: UseMode,
    frames: Vec<touchless::model::LandmarkFrame>,
) -> Result<(), Box<dyn std::error::Error>> {
    let mut m = ExerciseModule::new(ExerciseConfig::default(), mode, Vec::new())?;
    println!("-- {name}");
    for f in &frames {
        for e in m.step(f.pose.as_ref(), VGA, f.t_ms)? {
            println!("{:>8.1} ms  {:?}", e.t_ms, e.kind);
        }
    }
    let last = frames.last().map_or(0.0, |f| f.t_ms);
    for e in m.deactivate_all(last) {
        println!("{:>8.1} ms  {:?} (end of session)", e.t_ms, e.kind);
    }
    for (label, s) in &m.stats().labels {
        println!("{label}: {} reps, {:.0} ms active", s.reps, s.active_ms);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run("squats", UseMode::Standing, scenario::squat_reps().frames)?;
    run(
        "cycling",
        UseMode::Sitting,
        scenario::gaming_cycling().frames,
    )
}
