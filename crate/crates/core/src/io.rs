//! JSON Lines ingestion and canonical serialization for the five file
//! schemas: ground truth, detections, features, difficulty scores and
//! latencies. One record per line, UTF-8.
//!
//! Loading validates every invariant and reports the offending line;
//! serialization is canonical (fixed field order, shortest round-trip
//! number formatting), so `to_jsonl(load(x))` is a fixed point.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{
    Dataset, Detection, DetectorRun, DifficultyScore, FeatureRecord, ImageRecord, LatencySource,
};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses one JSONL file, skipping blank lines and `#` comment lines,
/// calling `visit` with each record and its 1-based line number.
fn parse_jsonl<T, F>(path: &Path, mut visit: F) -> Result<()>
where
    T: DeserializeOwned,
    F: FnMut(T, usize) -> Result<()>,
{
    let contents = read_to_string(path)?;
    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record: T = serde_json::from_str(trimmed).map_err(|e| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno,
            message: e.to_string(),
        })?;
        visit(record, lineno)?;
    }
    Ok(())
}

fn at_line(path: &Path, line: usize, err: Error) -> Error {
    match err {
        e @ Error::MalformedRecord { .. } => e,
        other => Error::MalformedRecord {
            path: path.display().to_string(),
            line,
            message: other.to_string(),
        },
    }
}

/// Loads and validates a ground-truth dataset, preserving file order.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut images: Vec<ImageRecord> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    parse_jsonl::<ImageRecord, _>(path, |img, lineno| {
        img.validate().map_err(|e| at_line(path, lineno, e))?;
        if seen.insert(img.image_id.clone(), lineno).is_some() {
            return Err(at_line(
                path,
                lineno,
                Error::DuplicateImageId {
                    id: img.image_id.clone(),
                },
            ));
        }
        images.push(img);
        Ok(())
    })?;
    Dataset::new(images)
}

/// Loads detections grouped per image, preserving per-image input order.
pub fn load_detections(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Detection>>> {
    let path = path.as_ref();
    let mut by_image: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    parse_jsonl::<Detection, _>(path, |det, lineno| {
        det.validate().map_err(|e| at_line(path, lineno, e))?;
        by_image.entry(det.image_id.clone()).or_default().push(det);
        Ok(())
    })?;
    Ok(by_image)
}

/// Loads per-image latencies: `{"image_id": ..., "seconds": ...}`.
pub fn load_latencies(path: impl AsRef<Path>) -> Result<BTreeMap<String, f64>> {
    #[derive(serde::Deserialize)]
    struct LatencyRecord {
        image_id: String,
        seconds: f64,
    }
    let path = path.as_ref();
    let mut map = BTreeMap::new();
    parse_jsonl::<LatencyRecord, _>(path, |rec, lineno| {
        if !rec.seconds.is_finite() || rec.seconds < 0.0 {
            return Err(at_line(
                path,
                lineno,
                Error::NegativeLatency {
                    image_id: rec.image_id.clone(),
                    seconds: rec.seconds,
                },
            ));
        }
        map.insert(rec.image_id, rec.seconds);
        Ok(())
    })?;
    Ok(map)
}

/// Assembles a detector run from a detections file and a latency source.
pub fn load_detector_run(
    detector_id: impl Into<String>,
    detections_path: impl AsRef<Path>,
    latency: LatencySource,
) -> Result<DetectorRun> {
    let detections = load_detections(detections_path)?;
    DetectorRun::new(detector_id, detections, latency)
}

/// Loads feature records, enforcing one consistent dimensionality.
pub fn load_features(path: impl AsRef<Path>) -> Result<Vec<FeatureRecord>> {
    let path = path.as_ref();
    let mut records: Vec<FeatureRecord> = Vec::new();
    let mut dim: Option<usize> = None;
    parse_jsonl::<FeatureRecord, _>(path, |rec, lineno| {
        rec.validate().map_err(|e| at_line(path, lineno, e))?;
        match dim {
            None => dim = Some(rec.vector.len()),
            Some(d) if d != rec.vector.len() => {
                return Err(at_line(
                    path,
                    lineno,
                    Error::DimensionMismatch {
                        image_id: rec.image_id.clone(),
                        expected: d,
                        got: rec.vector.len(),
                    },
                ));
            }
            Some(_) => {}
        }
        records.push(rec);
        Ok(())
    })?;
    Ok(records)
}

/// Loads per-image difficulty scores.
pub fn load_difficulty_scores(path: impl AsRef<Path>) -> Result<Vec<DifficultyScore>> {
    let path = path.as_ref();
    let mut records = Vec::new();
    parse_jsonl::<DifficultyScore, _>(path, |rec, lineno| {
        rec.validate().map_err(|e| at_line(path, lineno, e))?;
        records.push(rec);
        Ok(())
    })?;
    Ok(records)
}

/// Canonical JSONL rendering of any record sequence.
pub fn to_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(&rec).expect("serializable record"));
        out.push('\n');
    }
    out
}

pub fn write_jsonl<T: Serialize>(
    path: impl AsRef<Path>,
    records: impl IntoIterator<Item = T>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_jsonl(records)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_single_image_with_one_object() {
        let f = temp_file(
            r#"{"image_id": "img1", "width": 100, "height": 80, "objects": [{"class": "car", "bbox": [10, 10, 50, 40], "difficult": false}]}"#,
        );
        let ds = load_dataset(f.path()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.images()[0].objects.len(), 1);
        assert_eq!(ds.images()[0].objects[0].class_label, "car");
    }

    #[test]
    fn duplicate_image_id_names_the_id() {
        let f = temp_file(
            "{\"image_id\": \"dup\", \"width\": 10, \"height\": 10, \"objects\": []}\n\
             {\"image_id\": \"dup\", \"width\": 10, \"height\": 10, \"objects\": []}\n",
        );
        let err = load_dataset(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dup"), "{msg}");
        assert!(msg.contains(":2:"), "line number missing: {msg}");
    }

    #[test]
    fn degenerate_box_is_an_error() {
        let f = temp_file(
            r#"{"image_id": "img1", "width": 100, "height": 80, "objects": [{"class": "car", "bbox": [10, 10, 10, 40], "difficult": false}]}"#,
        );
        assert!(load_dataset(f.path()).is_err());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = temp_file(
            "{\"image_id\": \"a\", \"width\": 10, \"height\": 10, \"objects\": []}\nnot json\n",
        );
        let err = load_dataset(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn constant_latency_applies_to_all_images() {
        let f = temp_file(
            "{\"image_id\": \"a\", \"class\": \"car\", \"score\": 0.9, \"bbox\": [0, 0, 5, 5]}\n\
             {\"image_id\": \"b\", \"class\": \"car\", \"score\": 0.8, \"bbox\": [1, 1, 6, 6]}\n",
        );
        let run = load_detector_run("mobile", f.path(), LatencySource::Constant(0.07)).unwrap();
        assert_eq!(run.latency_for("a"), Some(0.07));
        assert_eq!(run.latency_for("b"), Some(0.07));
    }

    #[test]
    fn empty_detections_file_is_a_valid_run() {
        let f = temp_file("");
        let run = load_detector_run("fast", f.path(), LatencySource::Constant(0.07)).unwrap();
        assert!(run.detections.is_empty());
    }

    #[test]
    fn negative_latency_rejected_on_load() {
        let f = temp_file("{\"image_id\": \"a\", \"seconds\": -1.0}\n");
        assert!(load_latencies(f.path()).is_err());
    }

    #[test]
    fn feature_dimension_mismatch_rejected() {
        let ok = temp_file(
            "{\"image_id\": \"a\", \"vector\": [1, 2, 3, 4]}\n\
             {\"image_id\": \"b\", \"vector\": [5, 6, 7, 8]}\n",
        );
        assert_eq!(load_features(ok.path()).unwrap().len(), 2);

        let bad = temp_file(
            "{\"image_id\": \"a\", \"vector\": [1, 2, 3, 4]}\n\
             {\"image_id\": \"b\", \"vector\": [5, 6, 7, 8, 9]}\n",
        );
        assert!(load_features(bad.path()).is_err());
    }

    #[test]
    fn non_finite_feature_rejected() {
        let f = temp_file("{\"image_id\": \"a\", \"vector\": [1, null, 3]}\n");
        assert!(load_features(f.path()).is_err());
        let g = temp_file("{\"image_id\": \"a\", \"vector\": [1, 1e999, 3]}\n");
        assert!(load_features(g.path()).is_err());
    }

    #[test]
    fn serialization_is_idempotent() {
        let f = temp_file(
            "{\"image_id\":\"img1\",\"width\":100,\"height\":80,\"objects\":[{\"class\":\"car\",\"bbox\":[10.5,10,50,40],\"difficult\":true}]}\n\
             {\"image_id\":\"img2\",\"width\":100,\"height\":80,\"objects\":[]}\n",
        );
        let ds = load_dataset(f.path()).unwrap();
        let once = to_jsonl(ds.images());
        let g = temp_file(&once);
        let reloaded = load_dataset(g.path()).unwrap();
        let twice = to_jsonl(reloaded.images());
        assert_eq!(once, twice);
    }
}
