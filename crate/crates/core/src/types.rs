//! Domain types shared by every stage of the pipeline: boxes, ground truth,
//! detections, cached detector runs, feature vectors and difficulty scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in continuous pixel coordinates, corner-based.
///
/// No +1 pixel convention is applied anywhere: the area of a box is
/// `(x_max - x_min) * (y_max - y_min)`, so IoU is unambiguous for
/// fractional coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BoundingBox {
    /// Validates finiteness and strict ordering of the corners.
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let coords = [self.x_min, self.y_min, self.x_max, self.y_max];
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(self.invalid("non-finite coordinate"));
        }
        if self.x_min >= self.x_max {
            return Err(self.invalid("x_min must be strictly less than x_max"));
        }
        if self.y_min >= self.y_max {
            return Err(self.invalid("y_min must be strictly less than y_max"));
        }
        Ok(())
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidBox {
            x_min: self.x_min,
            y_min: self.y_min,
            x_max: self.x_max,
            y_max: self.y_max,
            reason: reason.to_string(),
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }
}

// The wire format for boxes is the 4-element array [xmin, ymin, xmax, ymax].
impl Serialize for BoundingBox {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x_min, self.y_min, self.x_max, self.y_max].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x_min, y_min, x_max, y_max] = <[f64; 4]>::deserialize(deserializer)?;
        Ok(BoundingBox {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }
}

/// One annotated object of a ground-truth image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    #[serde(rename = "class")]
    pub class_label: String,
    pub bbox: BoundingBox,
    #[serde(default)]
    pub difficult: bool,
}

/// One test image with its annotated objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    pub objects: Vec<GroundTruthObject>,
}

impl ImageRecord {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidConfig(format!(
                "image {:?} has zero width or height",
                self.image_id
            )));
        }
        for obj in &self.objects {
            if obj.class_label.is_empty() {
                return Err(Error::EmptyClassLabel {
                    image_id: self.image_id.clone(),
                });
            }
            obj.bbox.validate()?;
            let (w, h) = (f64::from(self.width), f64::from(self.height));
            if obj.bbox.x_min < 0.0 || obj.bbox.y_min < 0.0 || obj.bbox.x_max > w || obj.bbox.y_max > h {
                return Err(Error::BoxOutOfBounds {
                    image_id: self.image_id.clone(),
                    x_min: obj.bbox.x_min,
                    y_min: obj.bbox.y_min,
                    x_max: obj.bbox.x_max,
                    y_max: obj.bbox.y_max,
                    width: self.width,
                    height: self.height,
                });
            }
        }
        Ok(())
    }
}

/// An ordered dataset of images with a unique-id index.
#[derive(Debug, Clone)]
pub struct Dataset {
    images: Vec<ImageRecord>,
    index: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn new(images: Vec<ImageRecord>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, img) in images.iter().enumerate() {
            img.validate()?;
            if index.insert(img.image_id.clone(), i).is_some() {
                return Err(Error::DuplicateImageId {
                    id: img.image_id.clone(),
                });
            }
        }
        Ok(Dataset { images, index })
    }

    pub fn images(&self) -> &[ImageRecord] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn contains(&self, image_id: &str) -> bool {
        self.index.contains_key(image_id)
    }

    pub fn get(&self, image_id: &str) -> Option<&ImageRecord> {
        self.index.get(image_id).map(|&i| &self.images[i])
    }

    /// Image ids in dataset (file) order.
    pub fn image_ids(&self) -> impl Iterator<Item = &str> {
        self.images.iter().map(|img| img.image_id.as_str())
    }
}

/// One predicted box with a confidence score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    #[serde(rename = "class")]
    pub class_label: String,
    pub score: f64,
    pub bbox: BoundingBox,
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        if self.class_label.is_empty() {
            return Err(Error::EmptyClassLabel {
                image_id: self.image_id.clone(),
            });
        }
        if !self.score.is_finite() {
            return Err(Error::NonFinite {
                image_id: self.image_id.clone(),
                field: "score".to_string(),
            });
        }
        self.bbox.validate()
    }
}

/// Where a detector's per-image latency comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum LatencySource {
    /// A single mean seconds-per-image figure applied to every image.
    Constant(f64),
    /// Measured seconds per image.
    PerImage(BTreeMap<String, f64>),
}

impl LatencySource {
    pub fn validate(&self) -> Result<()> {
        match self {
            LatencySource::Constant(s) => {
                if !s.is_finite() || *s < 0.0 {
                    return Err(Error::NegativeLatency {
                        image_id: "<constant>".to_string(),
                        seconds: *s,
                    });
                }
            }
            LatencySource::PerImage(map) => {
                for (id, s) in map {
                    if !s.is_finite() || *s < 0.0 {
                        return Err(Error::NegativeLatency {
                            image_id: id.clone(),
                            seconds: *s,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A named detector's cached output: per-image detections plus latency.
/// This is the black box the router dispatches between; nothing downstream
/// ever runs a model.
#[derive(Debug, Clone)]
pub struct DetectorRun {
    pub detector_id: String,
    /// Detections grouped by image, preserving input-file order per image.
    pub detections: BTreeMap<String, Vec<Detection>>,
    pub latency: LatencySource,
}

impl DetectorRun {
    pub fn new(
        detector_id: impl Into<String>,
        detections: BTreeMap<String, Vec<Detection>>,
        latency: LatencySource,
    ) -> Result<Self> {
        let detector_id = detector_id.into();
        latency.validate()?;
        for dets in detections.values() {
            for det in dets {
                det.validate()?;
            }
        }
        let run = DetectorRun {
            detector_id,
            detections,
            latency,
        };
        // With per-image latencies, every image that has detections must
        // also have a latency entry.
        if let LatencySource::PerImage(map) = &run.latency {
            for id in run.detections.keys() {
                if !map.contains_key(id) {
                    return Err(Error::MissingLatency {
                        image_id: id.clone(),
                        detector_id: run.detector_id.clone(),
                    });
                }
            }
        }
        Ok(run)
    }

    /// Whether this run can serve the given image (detections may be empty,
    /// but the latency must be defined).
    pub fn covers(&self, image_id: &str) -> bool {
        match &self.latency {
            LatencySource::Constant(_) => true,
            LatencySource::PerImage(map) => map.contains_key(image_id),
        }
    }

    pub fn latency_for(&self, image_id: &str) -> Option<f64> {
        match &self.latency {
            LatencySource::Constant(s) => Some(*s),
            LatencySource::PerImage(map) => map.get(image_id).copied(),
        }
    }

    pub fn detections_for(&self, image_id: &str) -> &[Detection] {
        self.detections.get(image_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Image ids whose detections reference images absent from `dataset`.
    pub fn unresolved_ids(&self, dataset: &Dataset) -> Vec<String> {
        self.detections
            .keys()
            .filter(|id| !dataset.contains(id))
            .cloned()
            .collect()
    }
}

/// Per-image feature vector, ingested from precomputed files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub image_id: String,
    pub vector: Vec<f64>,
}

impl FeatureRecord {
    pub fn validate(&self) -> Result<()> {
        if let Some(pos) = self.vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                image_id: self.image_id.clone(),
                field: format!("vector[{pos}]"),
            });
        }
        Ok(())
    }
}

/// Per-image difficulty score; higher means harder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyScore {
    pub image_id: String,
    pub score: f64,
}

impl DifficultyScore {
    pub fn validate(&self) -> Result<()> {
        if !self.score.is_finite() {
            return Err(Error::NonFinite {
                image_id: self.image_id.clone(),
                field: "score".to_string(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rejects_degenerate_and_inverted() {
        assert!(BoundingBox::new(0.0, 0.0, 10.0, 10.0).is_ok());
        assert!(BoundingBox::new(5.0, 0.0, 5.0, 10.0).is_err());
        assert!(BoundingBox::new(6.0, 0.0, 5.0, 10.0).is_err());
        assert!(BoundingBox::new(0.0, f64::NAN, 5.0, 10.0).is_err());
    }

    #[test]
    fn dataset_rejects_duplicate_ids() {
        let img = ImageRecord {
            image_id: "a".into(),
            width: 10,
            height: 10,
            objects: vec![],
        };
        let err = Dataset::new(vec![img.clone(), img]).unwrap_err();
        assert!(matches!(err, Error::DuplicateImageId { id } if id == "a"));
    }

    #[test]
    fn dataset_rejects_out_of_bounds_objects() {
        let img = ImageRecord {
            image_id: "a".into(),
            width: 10,
            height: 10,
            objects: vec![GroundTruthObject {
                class_label: "car".into(),
                bbox: BoundingBox::new(0.0, 0.0, 12.0, 5.0).unwrap(),
                difficult: false,
            }],
        };
        assert!(matches!(
            Dataset::new(vec![img]).unwrap_err(),
            Error::BoxOutOfBounds { .. }
        ));
    }

    #[test]
    fn per_image_latency_must_cover_detected_images() {
        let det = Detection {
            image_id: "a".into(),
            class_label: "car".into(),
            score: 0.5,
            bbox: BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap(),
        };
        let mut dets = BTreeMap::new();
        dets.insert("a".to_string(), vec![det]);
        let err = DetectorRun::new("fast", dets, LatencySource::PerImage(BTreeMap::new()))
            .unwrap_err();
        assert!(matches!(err, Error::MissingLatency { .. }));
    }

    #[test]
    fn constant_latency_covers_everything() {
        let run = DetectorRun::new("fast", BTreeMap::new(), LatencySource::Constant(0.07)).unwrap();
        assert!(run.covers("anything"));
        assert_eq!(run.latency_for("anything"), Some(0.07));
        assert!(run.detections_for("anything").is_empty());
    }

    #[test]
    fn negative_latency_rejected() {
        let err = DetectorRun::new("fast", BTreeMap::new(), LatencySource::Constant(-1.0))
            .unwrap_err();
        assert!(matches!(err, Error::NegativeLatency { .. }));
    }
}
