//! User-recorded gesture templates: per-feature means and tolerances, scored
//! by a bounded mean normalized deviation.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::features::{PoseFeatures, ALL_FEATURES};
use crate::error::GestureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateMode {
    /// Activate/Deactivate while the pose is held.
    #[default]
    Hold,
    /// One TemplateRep per entry into the pose.
    Rep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GestureTemplate {
    pub name: String,
    pub features: BTreeMap<String, f64>,
    pub tol: BTreeMap<String, f64>,
    #[serde(default)]
    pub mode: TemplateMode,
}

/// Smallest tolerance a recording may produce, per unit family.
const MIN_TOL_DEG: f64 = 10.0;
const MIN_TOL_RATIO: f64 = 0.1;

fn tol_floor(feature: &str) -> f64 {
    if feature.starts_with("knee") || feature.starts_with("elbow") {
        MIN_TOL_DEG
    } else {
        MIN_TOL_RATIO
    }
}

impl GestureTemplate {
    pub fn validate(&self) -> Result<(), GestureError> {
        let bad = |m: String| {
            Err(GestureError::InvalidThresholds(format!(
                "template {:?}: {m}",
                self.name
            )))
        };
        if self.name.is_empty() {
            return bad("empty name".into());
        }
        if self.features.is_empty() {
            return bad("no features".into());
        }
        if self.features.keys().ne(self.tol.keys()) {
            return bad("features and tol must name the same keys".into());
        }
        for (k, &mu) in &self.features {
            if !PoseFeatures::is_known(k) {
                return bad(format!("unknown feature {k:?}"));
            }
            if !mu.is_finite() {
                return bad(format!("mean of {k} is not finite"));
            }
            let t = self.tol[k];
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("tolerance of {k} must be > 0"));
            }
        }
        Ok(())
    }
}

/// `max(0, 1 - mean_i |f_i - mu_i| / tol_i)` over the template features
/// available in this frame.
pub fn match_template(
    features: &PoseFeatures,
    template: &GestureTemplate,
) -> Result<f64, GestureError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (k, &mu) in &template.features {
        if let Some(f) = features.get(k) {
            sum += (f - mu).abs() / template.tol[k];
            n += 1;
        }
    }
    if n == 0 {
        return Err(GestureError::EmptyTemplate(template.name.clone()));
    }
    Ok((1.0 - sum / n as f64).max(0.0))
}

/// Builds a template from frames of a held pose. Only the features listed in
/// `names` that are present in at least half of the frames are kept.
pub fn record_template(
    name: &str,
    samples: &[PoseFeatures],
    names: &[&str],
    mode: TemplateMode,
) -> Result<GestureTemplate, GestureError> {
    let mut features = BTreeMap::new();
    let mut tol = BTreeMap::new();
    for &k in names {
        let xs: Vec<f64> = samples.iter().filter_map(|s| s.get(k)).collect();
        if xs.is_empty() || 2 * xs.len() < samples.len() {
            continue;
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        features.insert(k.to_string(), mean);
        tol.insert(k.to_string(), (3.0 * std).max(tol_floor(k)));
    }
    if features.is_empty() {
        return Err(GestureError::EmptyTemplate(name.to_string()));
    }
    let t = GestureTemplate {
        name: name.to_string(),
        features,
        tol,
        mode,
    };
    t.validate()?;
    Ok(t)
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate template name {0:?}")]
    Duplicate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads an NDJSON template set. Blank lines are skipped; names must be
/// unique.
pub fn read_templates<R: BufRead>(reader: R) -> Result<Vec<GestureTemplate>, TemplateFileError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| TemplateFileError::Parse {
            line: i + 1,
            message,
        };
        let t: GestureTemplate =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        t.validate().map_err(|e| parse_err(e.to_string()))?;
        if !seen.insert(t.name.clone()) {
            return Err(TemplateFileError::Duplicate(t.name));
        }
        out.push(t);
    }
    Ok(out)
}

pub fn write_template<W: Write>(mut w: W, template: &GestureTemplate) -> std::io::Result<()> {
    let line = serde_json::to_string(template).map_err(std::io::Error::other)?;
    writeln!(w, "{line}")
}

/// Names usable in a template, in canonical order.
pub fn known_features() -> &'static [&'static str] {
    &ALL_FEATURES
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> GestureTemplate {
        GestureTemplate {
            name: "row".into(),
            features: [
                ("elbow_left".to_string(), 90.0),
                ("reach_left".to_string(), 0.5),
            ]
            .into(),
            tol: [
                ("elbow_left".to_string(), 20.0),
                ("reach_left".to_string(), 0.2),
            ]
            .into(),
            mode: TemplateMode::Hold,
        }
    }

    fn feats(elbow: f64, reach: f64) -> PoseFeatures {
        PoseFeatures {
            elbow_left: Some(elbow),
            reach_left: Some(reach),
            ..PoseFeatures::default()
        }
    }

    #[test]
    fn confidence_formula() {
        let t = template();
        assert_eq!(match_template(&feats(90.0, 0.5), &t).unwrap(), 1.0);
        assert!(match_template(&feats(110.0, 0.7), &t).unwrap().abs() < 1e-12);
        assert!((match_template(&feats(100.0, 0.4), &t).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(match_template(&feats(200.0, 2.0), &t).unwrap(), 0.0);
    }

    #[test]
    fn unavailable_features_are_excluded() {
        let t = template();
        let partial = PoseFeatures {
            elbow_left: Some(95.0),
            ..PoseFeatures::default()
        };
        assert!((match_template(&partial, &t).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(
            match_template(&PoseFeatures::default(), &t),
            Err(GestureError::EmptyTemplate("row".into()))
        );
    }

    #[test]
    fn validation() {
        let mut t = template();
        t.tol.insert("elbow_left".into(), 0.0);
        assert!(t.validate().is_err());
        let mut t = template();
        t.tol.remove("reach_left");
        assert!(t.validate().is_err());
        let mut t = template();
        t.features.insert("nose".into(), 1.0);
        t.tol.insert("nose".into(), 1.0);
        assert!(t.validate().is_err());
    }

    #[test]
    fn recording_uses_floor_and_spread() {
        let samples: Vec<_> = (0..10)
            .map(|i| feats(90.0 + (i % 2) as f64 * 20.0, 0.5))
            .collect();
        let t = record_template(
            "row",
            &samples,
            &["elbow_left", "reach_left", "knee_left"],
            TemplateMode::Rep,
        )
        .unwrap();
        assert_eq!(t.features["elbow_left"], 100.0);
        assert!((t.tol["elbow_left"] - 30.0).abs() < 1e-9);
        assert_eq!(t.tol["reach_left"], MIN_TOL_RATIO);
        assert!(!t.features.contains_key("knee_left"));
        assert_eq!(match_template(&feats(100.0, 0.5), &t).unwrap(), 1.0);
    }

    #[test]
    fn ndjson_round_trip_and_duplicates() {
        let mut buf = Vec::new();
        write_template(&mut buf, &template()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"name\":\"row\",\"features\":"));
        assert!(text.contains("\"mode\":\"hold\""));
        assert_eq!(read_templates(&buf[..]).unwrap(), vec![template()]);
        buf.extend_from_slice(text.as_bytes());
        assert!(matches!(
            read_templates(&buf[..]),
            Err(TemplateFileError::Duplicate(_))
        ));
    }
}
