//! Depth from the iris diameter and the screen point of a gaze ray.
//!
//! cargo run --example gaze_depth

use touchless::gaze::{
    depth_from_iris, gaze_sample, resolve_depth, screen_point, CameraModel, GazeConfig,
    ScreenGeometry, IRIS_DIAMETER_MM,
};
use touchless::model::{ImageDims, LandmarkFrame, Point2};
use touchless::synth::FaceSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let image = ImageDims::new(1280, 720);
    let cam = CameraModel::for_image(image);
    for px in [40.0, 25.0, 15.0, 7.5] {
        println!(
            "iris {px:>4.1} px -> {:>6.0} mm",
            depth_from_iris(px, &cam, IRIS_DIAMETER_MM)?
        );
    }

    let cfg = GazeConfig::default();
    let screen = ScreenGeometry::default();
    // the eyes sit just above the camera, so the screen lies below them
    for (yaw, iris_x) in [(0.0, 0.0), (-10.0, 0.0), (0.0, 0.2), (40.0, 0.0)] {
        let face = FaceSpec {
            yaw_deg: yaw,
            pitch_deg: -15.0,
            iris_offset: (iris_x, 0.0),
            iris_diameter_px: Some(cam.f_px * IRIS_DIAMETER_MM / 600.0),
            ..FaceSpec::frontal(Point2::new(640.0, 300.0), 90.0)
        }
        .build(image);
        let frame = LandmarkFrame {
            face: Some(face.clone()),
            ..LandmarkFrame::empty(0.0, image)
        };
        let depth = resolve_depth(&frame, &cam, None, &cfg);
        let sample = gaze_sample(&face, image, depth, &cam, &cfg, 0.45)?;
        match screen_point(&sample, &screen) {
            Some((x, y)) => println!(
                "yaw {yaw:>5.1}, iris {iris_x:.1}: screen ({x:.0}, {y:.0}) at {:.0} mm",
                depth.depth_mm
            ),
            None => println!("yaw {yaw:>5.1}, iris {iris_x:.1}: off screen"),
        }
    }
    Ok(())
}
