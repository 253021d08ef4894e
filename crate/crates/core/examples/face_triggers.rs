//! Face module: eye and mouth triggers from aspect ratios, and the geometric
//! head pose of a turned face.
//!
//! cargo run --example face_triggers

use touchless::face::{face_ears, face_mar, head_pose, HeadConfig, HeadContext, HeadState};
use touchless::model::Point2;
use touchless::scenario::{self, VGA};
use touchless::synth::FaceSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut head = HeadState::new(HeadConfig::default(), 1920, 1080)?;
    let ctx = HeadContext {
        image: VGA,
        screen_w: 1920,
        screen_h: 1080,
    };
    for frame in scenario::blink_wink().frames {
        let face = frame.face.as_ref();
        if let Some(f) = face {
            let (l, r) = face_ears(f, VGA)?;
            if l < 0.2 || r < 0.2 || face_mar(f, VGA)? > 0.5 {
                println!(
                    "{:>7.1} ms    EAR {l:.2}/{r:.2}, MAR {:.2}",
                    frame.t_ms,
                    face_mar(f, VGA)?
                );
            }
        }
        for e in head.step(face, ctx, frame.t_ms)? {
            if e.is_cursor_move() {
                continue;
            }
            println!("{:>7.1} ms  {:?}", e.t_ms, e.kind);
        }
    }

    let turned = FaceSpec {
        yaw_deg: 20.0,
        pitch_deg: -10.0,
        roll_deg: 5.0,
        ..FaceSpec::frontal(Point2::new(320.0, 220.0), 70.0)
    };
    let pose = head_pose(
        &turned.build(VGA),
        VGA,
        HeadConfig::default().pitch_ref_ratio,
    )?;
    println!("built at yaw 20, pitch -10, roll 5; measured {pose:?}");
    Ok(())
}
