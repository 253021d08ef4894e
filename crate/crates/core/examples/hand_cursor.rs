//! Hand module on two synthetic sessions: the index tip sweeping the DAoI
//! diagonal drives the cursor corner to corner, and two pinches press and
//! release the left button.
//!
//! cargo run --example hand_cursor

use touchless::hand::{HandConfig, HandContext, HandModule};
use touchless::scenario::{self, VGA};
use touchless::GestureKind;

fn run(
    name: &str,
    frames: Vec<touchless::model::LandmarkFrame>,
) -> Result<(), Box<dyn std::error::Error>> {
    println!("-- {name}");
    let mut hand = HandModule::new(HandConfig::default())?;
    let ctx = HandContext {
        image: VGA,
        screen_w: 1920,
        screen_h: 1080,
    };
    let mut moves = 0;
    for frame in frames {
        for e in hand.step(&frame.hands, ctx, frame.t_ms)? {
            match e.kind {
                GestureKind::CursorMove { x, y, .. } => {
                    moves += 1;
                    if moves % 15 == 1 {
                        println!("{:>7.1} ms  cursor ({x:.0}, {y:.0})", e.t_ms);
                    }
                }
                kind => println!("{:>7.1} ms  {kind:?}", e.t_ms),
            }
        }
    }
    println!("{moves} cursor moves");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run("daoi_diagonal", scenario::daoi_diagonal().frames)?;
    run("pinch_click", scenario::pinch_click().frames)
}
