//! JSONL record types. Coordinates are pixels, angles degrees.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{ensure, Context, Result};
use groundplane::codec::{Detection, OffsetTriple, RawPrediction};
use groundplane::datagen::Box3D;
use groundplane::geometry::{Parallelogram, Point2};
use groundplane::metrics::GroundTruthLabel;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

fn to_points(v: &[[f64; 2]; 4]) -> [Point2; 4] {
    v.map(Point2::from)
}

fn footprint_from(vertices: &[[f64; 2]; 4], center: [f64; 2]) -> Result<Parallelogram> {
    Ok(Parallelogram::from_parts(
        to_points(vertices),
        Point2::from(center),
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    pub image_id: String,
    pub class_id: u32,
    /// `p1, p2, p3, p4`; `p1`–`p2` is the front edge.
    pub vertices: [[f64; 2]; 4],
    pub center: [f64; 2],
    /// Largest corner displacement of the parallelogram fit, when the label
    /// came from a projected box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_residual: Option<f64>,
}

impl LabelRecord {
    pub fn new(
        image_id: &str,
        class_id: u32,
        footprint: &Parallelogram,
        fit_residual: Option<f64>,
    ) -> Self {
        Self {
            image_id: image_id.to_string(),
            class_id,
            vertices: footprint.vertices().map(Point2::to_array),
            center: footprint.center().to_array(),
            fit_residual,
        }
    }

    pub fn to_label(&self) -> Result<GroundTruthLabel> {
        Ok(GroundTruthLabel {
            footprint: footprint_from(&self.vertices, self.center)?,
            class_id: self.class_id,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionRecord {
    pub image_id: String,
    pub class_id: u32,
    pub confidence: f64,
    pub vertices: [[f64; 2]; 4],
    pub center: [f64; 2],
}

impl DetectionRecord {
    pub fn new(image_id: &str, det: &Detection) -> Self {
        Self {
            image_id: image_id.to_string(),
            class_id: det.class_id,
            confidence: det.confidence,
            vertices: det.footprint.vertices().map(Point2::to_array),
            center: det.footprint.center().to_array(),
        }
    }

    pub fn to_detection(&self) -> Result<Detection> {
        ensure!(
            (0.0..=1.0).contains(&self.confidence),
            "confidence {} outside [0, 1]",
            self.confidence
        );
        Ok(Detection {
            footprint: footprint_from(&self.vertices, self.center)?,
            class_id: self.class_id,
            confidence: self.confidence,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPredictionRecord {
    pub image_id: String,
    pub anchor_index: usize,
    pub v1: [f64; 2],
    pub v2: [f64; 2],
    pub v3: [f64; 2],
    pub class_scores: Vec<f64>,
}

impl RawPredictionRecord {
    pub fn to_raw(&self) -> Result<RawPrediction> {
        let raw = RawPrediction {
            anchor_index: self.anchor_index,
            offsets: OffsetTriple {
                v1: self.v1.into(),
                v2: self.v2.into(),
                v3: self.v3.into(),
            },
            class_scores: self.class_scores.clone(),
        };
        raw.validate()?;
        Ok(raw)
    }
}

/// World-space vehicle box; `center` in meters, `yaw_deg` counter-clockwise
/// from the world x axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxRecord {
    pub image_id: String,
    pub class_id: u32,
    pub center: [f64; 3],
    pub length: f64,
    pub width: f64,
    pub yaw_deg: f64,
}

impl BoxRecord {
    pub fn new(image_id: &str, class_id: u32, b: &Box3D) -> Self {
        Self {
            image_id: image_id.to_string(),
            class_id,
            center: b.center,
            length: b.length,
            width: b.width,
            yaw_deg: b.yaw.to_degrees(),
        }
    }

    pub fn to_box(&self) -> Result<Box3D> {
        ensure!(
            self.length > 0.0 && self.width > 0.0,
            "box dimensions must be positive"
        );
        Ok(Box3D {
            center: self.center,
            length: self.length,
            width: self.width,
            yaw: self.yaw_deg.to_radians(),
        })
    }
}

/// Three annotated corners; the middle one is where the two visible edges
/// meet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LShapeRecord {
    pub image_id: String,
    pub class_id: u32,
    pub corners: [[f64; 2]; 3],
}

/// Parses every non-blank line, then converts it; errors name the file and
/// line.
pub fn load_jsonl<T, U>(path: &Path, convert: impl Fn(T) -> Result<U>) -> Result<Vec<U>>
where
    T: DeserializeOwned,
{
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}:{}: read error", path.display(), i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line)
            .map_err(anyhow::Error::from)
            .and_then(&convert)
            .with_context(|| format!("{}:{}: invalid record", path.display(), i + 1))?;
        out.push(parsed);
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    load_jsonl(path, Ok)
}

pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a T>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
