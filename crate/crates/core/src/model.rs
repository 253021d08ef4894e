//! Landmark frame data model and the NDJSON frame codec.
//!
//! One record per line:
//!
//! ```text
//! {"t": <ms>, "img": {"w": <int>, "h": <int>},
//!  "hands": [{"hand": "left"|"right", "score": <0..1>, "lm": [[x,y,z] x21]}],
//!  "face": {"lm68": [[x,y] x68], "iris_l": [[x,y] x5]|null, "iris_r": [[x,y] x5]|null} | null,
//!  "pose": {"lm": [[x,y,z,vis] x33], "nose_mm": <float>|null} | null}
//! ```
//!
//! Coordinates are normalized image coordinates with y pointing down. Unknown
//! top-level fields are ignored; absent blocks stay absent.

use serde_json::{json, Map, Value};

use crate::error::FrameError;

pub const HAND_POINTS: usize = 21;
pub const FACE_POINTS: usize = 68;
pub const IRIS_POINTS: usize = 5;
pub const POSE_POINTS: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;

    fn sub(self, other: Point2) -> Point2 {
        Point2::new(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    /// Relative depth, unitless; smaller is closer to the camera.
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn xy(self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Maps a normalized point into pixel units.
pub trait ToPixels {
    type Output;
    fn to_pixels(&self, dims: ImageDims) -> Self::Output;
}

impl ToPixels for Point2 {
    type Output = Point2;
    fn to_pixels(&self, dims: ImageDims) -> Point2 {
        Point2::new(self.x * dims.w as f64, self.y * dims.h as f64)
    }
}

impl ToPixels for Point3 {
    type Output = Point3;
    fn to_pixels(&self, dims: ImageDims) -> Point3 {
        Point3::new(self.x * dims.w as f64, self.y * dims.h as f64, self.z)
    }
}

/// `(x * w, y * h)`; z passes through unchanged.
pub fn to_pixels<P: ToPixels>(p: &P, dims: ImageDims) -> P::Output {
    p.to_pixels(dims)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImageDims {
    pub w: u32,
    pub h: u32,
}

impl ImageDims {
    pub const fn new(w: u32, h: u32) -> Self {
        ImageDims { w, h }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub fn as_str(self) -> &'static str {
        match self {
            Handedness::Left => "left",
            Handedness::Right => "right",
        }
    }

    pub fn flipped(self) -> Handedness {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }
}

/// Standard 21-point hand topology indices.
pub mod hand_idx {
    pub const WRIST: usize = 0;
    pub const THUMB_MCP: usize = 2;
    pub const THUMB_IP: usize = 3;
    pub const THUMB_TIP: usize = 4;
    pub const INDEX_MCP: usize = 5;
    pub const INDEX_PIP: usize = 6;
    pub const INDEX_TIP: usize = 8;
    pub const MIDDLE_MCP: usize = 9;
    pub const MIDDLE_PIP: usize = 10;
    pub const MIDDLE_TIP: usize = 12;
    pub const RING_MCP: usize = 13;
    pub const RING_PIP: usize = 14;
    pub const RING_TIP: usize = 16;
    pub const PINKY_MCP: usize = 17;
    pub const PINKY_PIP: usize = 18;
    pub const PINKY_TIP: usize = 20;
}

/// Standard 33-point body topology indices.
pub mod pose_idx {
    pub const NOSE: usize = 0;
    pub const LEFT_SHOULDER: usize = 11;
    pub const RIGHT_SHOULDER: usize = 12;
    pub const LEFT_ELBOW: usize = 13;
    pub const RIGHT_ELBOW: usize = 14;
    pub const LEFT_WRIST: usize = 15;
    pub const RIGHT_WRIST: usize = 16;
    pub const LEFT_HIP: usize = 23;
    pub const RIGHT_HIP: usize = 24;
    pub const LEFT_KNEE: usize = 25;
    pub const RIGHT_KNEE: usize = 26;
    pub const LEFT_ANKLE: usize = 27;
    pub const RIGHT_ANKLE: usize = 28;
}

#[derive(Debug, Clone, PartialEq)]
pub struct HandFrame {
    pub handedness: Handedness,
    pub score: f64,
    pub points: [Point3; HAND_POINTS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceFrame {
    pub points68: [Point2; FACE_POINTS],
    pub iris_left: Option<[Point2; IRIS_POINTS]>,
    pub iris_right: Option<[Point2; IRIS_POINTS]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseLandmark {
    pub point: Point3,
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame {
    pub points: [PoseLandmark; POSE_POINTS],
    pub metric_nose_depth_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    pub t_ms: f64,
    pub image: ImageDims,
    pub hands: Vec<HandFrame>,
    pub face: Option<FaceFrame>,
    pub pose: Option<PoseFrame>,
}

impl LandmarkFrame {
    pub fn empty(t_ms: f64, image: ImageDims) -> Self {
        LandmarkFrame {
            t_ms,
            image,
            hands: Vec::new(),
            face: None,
            pose: None,
        }
    }

    pub fn hand(&self, handedness: Handedness) -> Option<&HandFrame> {
        self.hands.iter().find(|h| h.handedness == handedness)
    }

    /// Same timestamp and image, nothing observed.
    pub fn without_subject(&self) -> Self {
        LandmarkFrame::empty(self.t_ms, self.image)
    }
}

pub fn parse_frame(line: &str) -> Result<LandmarkFrame, FrameError> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| FrameError::MalformedRecord(e.to_string()))?;
    frame_from_value(&value)
}

/// Returns true for a provider metadata header line (`{"meta": ...}` without `t`).
pub fn is_header_record(line: &str) -> bool {
    match serde_json::from_str::<Value>(line) {
        Ok(Value::Object(map)) => map.contains_key("meta") && !map.contains_key("t"),
        _ => false,
    }
}

pub fn frame_from_value(value: &Value) -> Result<LandmarkFrame, FrameError> {
    let obj = value
        .as_object()
        .ok_or_else(|| FrameError::schema("$", "record must be an object"))?;

    let t_ms = finite(field(obj, "t", "t")?, "t")?;

    let img = field(obj, "img", "img")?
        .as_object()
        .ok_or_else(|| FrameError::schema("img", "expected object"))?;
    let image = ImageDims::new(dimension(img, "w")?, dimension(img, "h")?);

    let hands = match obj.get("hands") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, h)| hand_from_value(h, &format!("hands[{i}]")))
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(FrameError::schema("hands", "expected array")),
    };
    if hands.len() > 2 {
        return Err(FrameError::schema(
            "hands",
            format!("at most 2 hands, got {}", hands.len()),
        ));
    }
    if hands.len() == 2 && hands[0].handedness == hands[1].handedness {
        return Err(FrameError::schema("hands[1].hand", "duplicate handedness"));
    }

    let face = match obj.get("face") {
        None | Some(Value::Null) => None,
        Some(v) => Some(face_from_value(v)?),
    };
    let pose = match obj.get("pose") {
        None | Some(Value::Null) => None,
        Some(v) => Some(pose_from_value(v)?),
    };

    Ok(LandmarkFrame {
        t_ms,
        image,
        hands,
        face,
        pose,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, FrameError> {
    obj.get(key)
        .ok_or_else(|| FrameError::schema(path, "missing field"))
}

fn finite(v: &Value, path: &str) -> Result<f64, FrameError> {
    let x = v
        .as_f64()
        .ok_or_else(|| FrameError::schema(path, "expected number"))?;
    if !x.is_finite() {
        return Err(FrameError::schema(path, "non-finite number"));
    }
    Ok(x)
}

fn unit_interval(v: &Value, path: &str) -> Result<f64, FrameError> {
    let x = finite(v, path)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(FrameError::schema(path, format!("{x} outside [0, 1]")));
    }
    Ok(x)
}

fn dimension(img: &Map<String, Value>, key: &str) -> Result<u32, FrameError> {
    let path = format!("img.{key}");
    let v = img
        .get(key)
        .ok_or_else(|| FrameError::schema(&path, "missing field"))?;
    match v.as_u64() {
        Some(n) if n > 0 && n <= u32::MAX as u64 => Ok(n as u32),
        _ => Err(FrameError::schema(path, "expected positive integer")),
    }
}

fn point_list<'a>(v: &'a Value, path: &str, count: usize) -> Result<&'a [Value], FrameError> {
    let items = v
        .as_array()
        .ok_or_else(|| FrameError::schema(path, "expected array"))?;
    if items.len() != count {
        return Err(FrameError::schema(
            path,
            format!("expected {count}, got {}", items.len()),
        ));
    }
    Ok(items)
}

fn coords<const N: usize>(v: &Value, path: &str) -> Result<[f64; N], FrameError> {
    let items = v
        .as_array()
        .ok_or_else(|| FrameError::schema(path, "expected coordinate array"))?;
    if items.len() != N {
        return Err(FrameError::schema(
            path,
            format!("expected {N} components, got {}", items.len()),
        ));
    }
    let mut out = [0.0; N];
    for (k, item) in items.iter().enumerate() {
        out[k] = finite(item, &format!("{path}[{k}]"))?;
    }
    Ok(out)
}

fn point2_block<const N: usize>(v: &Value, path: &str) -> Result<[Point2; N], FrameError> {
    let items = point_list(v, path, N)?;
    let mut out = [Point2::default(); N];
    for (i, item) in items.iter().enumerate() {
        let [x, y] = coords::<2>(item, &format!("{path}[{i}]"))?;
        out[i] = Point2::new(x, y);
    }
    Ok(out)
}

fn hand_from_value(v: &Value, path: &str) -> Result<HandFrame, FrameError> {
    let obj = v
        .as_object()
        .ok_or_else(|| FrameError::schema(path, "expected object"))?;
    let hand_path = format!("{path}.hand");
    let handedness = match field(obj, "hand", &hand_path)?.as_str() {
        Some("left") => Handedness::Left,
        Some("right") => Handedness::Right,
        _ => {
            return Err(FrameError::schema(
                hand_path,
                "expected \"left\" or \"right\"",
            ))
        }
    };
    let score_path = format!("{path}.score");
    let score = unit_interval(field(obj, "score", &score_path)?, &score_path)?;
    let lm_path = format!("{path}.lm");
    let items = point_list(field(obj, "lm", &lm_path)?, &lm_path, HAND_POINTS)?;
    let mut points = [Point3::default(); HAND_POINTS];
    for (i, item) in items.iter().enumerate() {
        let [x, y, z] = coords::<3>(item, &format!("{lm_path}[{i}]"))?;
        points[i] = Point3::new(x, y, z);
    }
    Ok(HandFrame {
        handedness,
        score,
        points,
    })
}

fn face_from_value(v: &Value) -> Result<FaceFrame, FrameError> {
    let obj = v
        .as_object()
        .ok_or_else(|| FrameError::schema("face", "expected object or null"))?;
    let points68 = point2_block::<FACE_POINTS>(field(obj, "lm68", "face.lm68")?, "face.lm68")?;
    let iris = |key: &str| -> Result<Option<[Point2; IRIS_POINTS]>, FrameError> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(block) => point2_block::<IRIS_POINTS>(block, &format!("face.{key}")).map(Some),
        }
    };
    Ok(FaceFrame {
        points68,
        iris_left: iris("iris_l")?,
        iris_right: iris("iris_r")?,
    })
}

fn pose_from_value(v: &Value) -> Result<PoseFrame, FrameError> {
    let obj = v
        .as_object()
        .ok_or_else(|| FrameError::schema("pose", "expected object or null"))?;
    let items = point_list(field(obj, "lm", "pose.lm")?, "pose.lm", POSE_POINTS)?;
    let mut points = [PoseLandmark::default(); POSE_POINTS];
    for (i, item) in items.iter().enumerate() {
        let path = format!("pose.lm[{i}]");
        let [x, y, z, vis] = coords::<4>(item, &path)?;
        if !(0.0..=1.0).contains(&vis) {
            return Err(FrameError::schema(
                format!("{path}[3]"),
                format!("visibility {vis} outside [0, 1]"),
            ));
        }
        points[i] = PoseLandmark {
            point: Point3::new(x, y, z),
            visibility: vis,
        };
    }
    let metric_nose_depth_mm = match obj.get("nose_mm") {
        None | Some(Value::Null) => None,
        Some(d) => {
            let mm = finite(d, "pose.nose_mm")?;
            if mm <= 0.0 {
                return Err(FrameError::schema("pose.nose_mm", "must be > 0"));
            }
            Some(mm)
        }
    };
    Ok(PoseFrame {
        points,
        metric_nose_depth_mm,
    })
}

/// Canonical single-line encoding; `parse_frame` inverts it exactly.
pub fn serialize_frame(frame: &LandmarkFrame) -> String {
    frame_to_value(frame).to_string()
}

pub fn frame_to_value(frame: &LandmarkFrame) -> Value {
    let mut obj = Map::new();
    obj.insert("t".into(), json!(frame.t_ms));
    obj.insert(
        "img".into(),
        json!({"w": frame.image.w, "h": frame.image.h}),
    );
    let hands: Vec<Value> = frame
        .hands
        .iter()
        .map(|h| {
            let lm: Vec<Value> = h.points.iter().map(|p| json!([p.x, p.y, p.z])).collect();
            let mut m = Map::new();
            m.insert("hand".into(), json!(h.handedness.as_str()));
            m.insert("score".into(), json!(h.score));
            m.insert("lm".into(), Value::Array(lm));
            Value::Object(m)
        })
        .collect();
    obj.insert("hands".into(), Value::Array(hands));
    let face = frame.face.as_ref().map_or(Value::Null, |f| {
        let block = |pts: &[Point2]| Value::Array(pts.iter().map(|p| json!([p.x, p.y])).collect());
        let mut m = Map::new();
        m.insert("lm68".into(), block(&f.points68));
        m.insert(
            "iris_l".into(),
            f.iris_left.as_ref().map_or(Value::Null, |b| block(b)),
        );
        m.insert(
            "iris_r".into(),
            f.iris_right.as_ref().map_or(Value::Null, |b| block(b)),
        );
        Value::Object(m)
    });
    obj.insert("face".into(), face);
    let pose = frame.pose.as_ref().map_or(Value::Null, |p| {
        let lm: Vec<Value> = p
            .points
            .iter()
            .map(|l| json!([l.point.x, l.point.y, l.point.z, l.visibility]))
            .collect();
        let mut m = Map::new();
        m.insert("lm".into(), Value::Array(lm));
        m.insert("nose_mm".into(), json!(p.metric_nose_depth_mm));
        Value::Object(m)
    });
    obj.insert("pose".into(), pose);
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"t":0,"img":{"w":640,"h":480},"hands":[],"face":null,"pose":null}"#;

    fn hand_json(n: usize, score: f64) -> String {
        let pts: Vec<String> = (0..n)
            .map(|i| format!("[{},0.5,0.0]", i as f64 / 40.0))
            .collect();
        format!(
            r#"{{"hand":"right","score":{score},"lm":[{}]}}"#,
            pts.join(",")
        )
    }

    #[test]
    fn minimal_record_is_empty_frame() {
        let f = parse_frame(MINIMAL).unwrap();
        assert_eq!(f, LandmarkFrame::empty(0.0, ImageDims::new(640, 480)));
    }

    #[test]
    fn canonical_empty_frame() {
        let f = LandmarkFrame::empty(0.0, ImageDims::new(640, 480));
        assert_eq!(
            serialize_frame(&f),
            r#"{"t":0.0,"img":{"w":640,"h":480},"hands":[],"face":null,"pose":null}"#
        );
    }

    #[test]
    fn short_hand_names_field() {
        let line = format!(
            r#"{{"t":0,"img":{{"w":640,"h":480}},"hands":[{}],"face":null,"pose":null}}"#,
            hand_json(20, 0.9)
        );
        let err = parse_frame(&line).unwrap_err();
        assert_eq!(err.field(), Some("hands[0].lm"));
        assert!(err.to_string().contains("expected 21"), "{err}");
    }

    #[test]
    fn out_of_range_score_rejected() {
        let line = format!(
            r#"{{"t":0,"img":{{"w":640,"h":480}},"hands":[{}],"face":null,"pose":null}}"#,
            hand_json(21, 1.5)
        );
        let err = parse_frame(&line).unwrap_err();
        assert_eq!(err.field(), Some("hands[0].score"));
    }

    #[test]
    fn bad_syntax_is_malformed() {
        assert!(matches!(
            parse_frame("{\"t\":0,"),
            Err(FrameError::MalformedRecord(_))
        ));
    }

    #[test]
    fn duplicate_handedness_rejected() {
        let h = hand_json(21, 0.9);
        let line = format!(r#"{{"t":0,"img":{{"w":640,"h":480}},"hands":[{h},{h}]}}"#);
        assert!(parse_frame(&line).is_err());
    }

    #[test]
    fn zero_image_dimension_rejected() {
        let err = parse_frame(r#"{"t":0,"img":{"w":0,"h":480}}"#).unwrap_err();
        assert_eq!(err.field(), Some("img.w"));
    }

    #[test]
    fn unknown_fields_ignored_and_missing_blocks_absent() {
        let f = parse_frame(r#"{"t":5,"img":{"w":10,"h":10},"extra":{"a":1}}"#).unwrap();
        assert!(f.hands.is_empty() && f.face.is_none() && f.pose.is_none());
    }

    #[test]
    fn pixel_mapping() {
        let d = ImageDims::new(640, 480);
        assert_eq!(
            to_pixels(&Point2::new(0.5, 0.5), d),
            Point2::new(320.0, 240.0)
        );
        assert_eq!(to_pixels(&Point2::new(0.0, 0.0), d), Point2::new(0.0, 0.0));
        let hd = ImageDims::new(1920, 1080);
        assert_eq!(
            to_pixels(&Point2::new(1.0, 1.0), hd),
            Point2::new(1920.0, 1080.0)
        );
        assert_eq!(to_pixels(&Point3::new(0.5, 0.5, -0.2), d).z, -0.2);
    }

    #[test]
    fn header_detection() {
        assert!(is_header_record(r#"{"meta":{"fps":30}}"#));
        assert!(!is_header_record(MINIMAL));
    }
}
