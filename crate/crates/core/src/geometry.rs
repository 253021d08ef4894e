//! Small pixel-space geometry helpers.

use crate::model::Point2;

/// Interior angle at `b` in degrees, clamped to [0, 180]. `None` when either
/// segment has zero length.
pub fn angle_deg(a: Point2, b: Point2, c: Point2) -> Option<f64> {
    let u = a - b;
    let v = c - b;
    let nu = u.x.hypot(u.y);
    let nv = v.x.hypot(v.y);
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let cos = ((u.x * v.x + u.y * v.y) / (nu * nv)).clamp(-1.0, 1.0);
    Some(cos.acos().to_degrees().clamp(0.0, 180.0))
}

/// Rotates `p` around `center` by `deg` degrees (clockwise on screen, since y
/// points down).
pub fn rotate(p: Point2, center: Point2, deg: f64) -> Point2 {
    let (s, c) = deg.to_radians().sin_cos();
    let d = p - center;
    Point2::new(center.x + d.x * c - d.y * s, center.y + d.x * s + d.y * c)
}

pub fn centroid(points: &[Point2]) -> Point2 {
    let n = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    Point2::new(sx / n, sy / n)
}
