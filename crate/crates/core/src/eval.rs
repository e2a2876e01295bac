//! VOC-style detection evaluation: IoU, greedy matching, precision-recall
//! curves, per-class average precision and mAP.
//!
//! The protocol: detections of one class are sorted globally in decreasing
//! score order (ties broken by image id, then input order); each detection
//! greedily matches the highest-IoU not-yet-matched ground truth on its
//! image if that IoU exceeds the threshold; every ground truth matches at
//! most once, so later overlaps of a consumed ground truth count as false
//! positives. AP is the area under the right-envelope-interpolated PR curve
//! (continuous mode) or the mean of interpolated precision at the eleven
//! recall levels {0, 0.1, ..., 1.0}.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{BoundingBox, Dataset, Detection, GroundTruthObject};

/// Intersection over union of two valid boxes. Symmetric, in [0, 1],
/// exactly 0 for disjoint boxes and 1 for identical ones.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let iy = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = ix * iy;
    if inter == 0.0 {
        return 0.0;
    }
    inter / (a.area() + b.area() - inter)
}

/// How to integrate the PR curve into an AP number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApMode {
    /// Area under the right-envelope-interpolated curve (all-point).
    #[serde(rename = "continuous")]
    Continuous,
    /// Mean interpolated precision at recalls {0, 0.1, ..., 1.0}.
    #[serde(rename = "11pt")]
    ElevenPoint,
}

impl std::fmt::Display for ApMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ApMode::Continuous => write!(f, "continuous"),
            ApMode::ElevenPoint => write!(f, "11pt"),
        }
    }
}

impl std::str::FromStr for ApMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(ApMode::Continuous),
            "11pt" => Ok(ApMode::ElevenPoint),
            other => Err(Error::InvalidConfig(format!(
                "unknown ap mode {other:?} (expected continuous or 11pt)"
            ))),
        }
    }
}

/// Treatment of ground truths flagged difficult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifficultPolicy {
    /// Standard VOC practice: difficult objects are not positives and do
    /// not turn overlapping detections into false positives.
    #[default]
    Exclude,
    /// Treat difficult objects like any other ground truth.
    CountNormally,
}

/// Evaluation knobs, shared by the CLI and the trade-off harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub iou_threshold: f64,
    pub ap_mode: ApMode,
    pub difficult_policy: DifficultPolicy,
    /// Optional confidence filter applied before matching; `None` keeps
    /// every detection.
    pub score_threshold: Option<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            iou_threshold: 0.5,
            ap_mode: ApMode::Continuous,
            difficult_policy: DifficultPolicy::Exclude,
            score_threshold: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "iou_threshold must lie in (0, 1), got {}",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    TruePositive,
    FalsePositive,
}

/// Outcome for one counted detection. Detections absorbed by a difficult
/// ground truth under [`DifficultPolicy::Exclude`] produce no outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchOutcome {
    /// Index of the detection in the input slice.
    pub detection: usize,
    pub verdict: Verdict,
    /// Index of the consumed ground truth; present iff the verdict is
    /// [`Verdict::TruePositive`].
    pub matched_gt: Option<usize>,
}

/// Greedy per-image matching of one class's detections against that
/// class's ground truths. Outcomes are returned in decreasing score order
/// (ties by input order).
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    iou_threshold: f64,
    policy: DifficultPolicy,
) -> Vec<MatchOutcome> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut consumed = vec![false; gts.len()];
    let mut outcomes = Vec::with_capacity(dets.len());
    for det_idx in order {
        let det = &dets[det_idx];
        // Highest-IoU eligible ground truth: unmatched live objects, plus
        // difficult ones (never consumed) when the policy excludes them.
        let mut best: Option<(usize, f64)> = None;
        for (gt_idx, gt) in gts.iter().enumerate() {
            let shielding = gt.difficult && policy == DifficultPolicy::Exclude;
            if consumed[gt_idx] && !shielding {
                continue;
            }
            let overlap = iou(&det.bbox, &gt.bbox);
            let better = match best {
                None => true,
                Some((_, best_iou)) => overlap > best_iou,
            };
            if better {
                best = Some((gt_idx, overlap));
            }
        }
        match best {
            Some((gt_idx, overlap)) if overlap > iou_threshold => {
                if gts[gt_idx].difficult && policy == DifficultPolicy::Exclude {
                    // Shielded: neither TP nor FP.
                    continue;
                }
                consumed[gt_idx] = true;
                outcomes.push(MatchOutcome {
                    detection: det_idx,
                    verdict: Verdict::TruePositive,
                    matched_gt: Some(gt_idx),
                });
            }
            _ => outcomes.push(MatchOutcome {
                detection: det_idx,
                verdict: Verdict::FalsePositive,
                matched_gt: None,
            }),
        }
    }
    outcomes
}

/// One (recall, precision) pair per counted detection, in rank order.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    pub points: Vec<PrPoint>,
    pub total_positives: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

struct RankedDetection<'a> {
    image_id: &'a str,
    input_index: usize,
    score: f64,
    verdict: Verdict,
}

/// Builds the global PR curve of one class across images.
///
/// `dets_by_image` and `gts_by_image` hold only this class's detections and
/// ground truths. Detections are ranked by (score desc, image_id, input
/// order) and matched greedily per image.
pub fn pr_curve(
    dets_by_image: &BTreeMap<&str, Vec<Detection>>,
    gts_by_image: &BTreeMap<&str, Vec<GroundTruthObject>>,
    iou_threshold: f64,
    policy: DifficultPolicy,
) -> PRCurve {
    let total_positives: usize = gts_by_image
        .values()
        .flatten()
        .filter(|gt| policy == DifficultPolicy::CountNormally || !gt.difficult)
        .count();

    let empty: Vec<GroundTruthObject> = Vec::new();
    let mut ranked: Vec<RankedDetection> = Vec::new();
    for (image_id, dets) in dets_by_image {
        let gts = gts_by_image.get(image_id).unwrap_or(&empty);
        for outcome in match_detections(dets, gts, iou_threshold, policy) {
            ranked.push(RankedDetection {
                image_id,
                input_index: outcome.detection,
                score: dets[outcome.detection].score,
                verdict: outcome.verdict,
            });
        }
    }
    ranked.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.image_id.cmp(b.image_id))
            .then_with(|| a.input_index.cmp(&b.input_index))
    });

    let mut tp = 0usize;
    let mut points = Vec::with_capacity(ranked.len());
    for (rank, det) in ranked.iter().enumerate() {
        if det.verdict == Verdict::TruePositive {
            tp += 1;
        }
        let recall = if total_positives == 0 {
            0.0
        } else {
            tp as f64 / total_positives as f64
        };
        points.push(PrPoint {
            recall,
            precision: tp as f64 / (rank + 1) as f64,
        });
    }
    PRCurve {
        points,
        total_positives,
    }
}

/// Average precision of one PR curve.
pub fn average_precision(curve: &PRCurve, mode: ApMode) -> f64 {
    if curve.points.is_empty() {
        return 0.0;
    }
    // Right envelope: interpolated precision at each rank is the maximum
    // precision at any rank with equal or greater recall.
    let n = curve.points.len();
    let mut envelope = vec![0.0f64; n];
    let mut running = 0.0f64;
    for k in (0..n).rev() {
        running = running.max(curve.points[k].precision);
        envelope[k] = running;
    }
    match mode {
        ApMode::Continuous => {
            let mut ap = 0.0;
            let mut prev_recall = 0.0;
            for k in 0..n {
                let r = curve.points[k].recall;
                if r > prev_recall {
                    ap += (r - prev_recall) * envelope[k];
                    prev_recall = r;
                }
            }
            ap
        }
        ApMode::ElevenPoint => {
            let mut sum = 0.0;
            for level in 0..=10 {
                let r = level as f64 / 10.0;
                let p = curve
                    .points
                    .iter()
                    .zip(&envelope)
                    .find(|(pt, _)| pt.recall >= r)
                    .map(|(_, &env)| env)
                    .unwrap_or(0.0);
                sum += p;
            }
            sum / 11.0
        }
    }
}

/// Per-class AP map plus the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub map: f64,
    pub per_class: BTreeMap<String, f64>,
    pub ap_mode: ApMode,
    pub iou_threshold: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Evaluates detections against a dataset and reports per-class AP and mAP.
///
/// Classes present in the ground truth are always evaluated; classes that
/// appear only in detections contribute an AP of 0. Unknown image ids in
/// the detections are an error, never silently dropped.
pub fn mean_average_precision(
    detections_by_image: &BTreeMap<String, Vec<Detection>>,
    dataset: &Dataset,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let unresolved: Vec<String> = detections_by_image
        .keys()
        .filter(|id| !dataset.contains(id))
        .cloned()
        .collect();
    if !unresolved.is_empty() {
        return Err(Error::UnresolvedImageIds { ids: unresolved });
    }

    let mut classes: BTreeSet<&str> = BTreeSet::new();
    for img in dataset.images() {
        for obj in &img.objects {
            classes.insert(obj.class_label.as_str());
        }
    }
    for dets in detections_by_image.values() {
        for det in dets {
            classes.insert(det.class_label.as_str());
        }
    }

    let mut per_class = BTreeMap::new();
    for class in classes {
        let mut gts_by_image: BTreeMap<&str, Vec<GroundTruthObject>> = BTreeMap::new();
        for img in dataset.images() {
            let objs: Vec<GroundTruthObject> = img
                .objects
                .iter()
                .filter(|o| o.class_label == class)
                .cloned()
                .collect();
            if !objs.is_empty() {
                gts_by_image.insert(img.image_id.as_str(), objs);
            }
        }
        let mut dets_by_image: BTreeMap<&str, Vec<Detection>> = BTreeMap::new();
        for (image_id, dets) in detections_by_image {
            let filtered: Vec<Detection> = dets
                .iter()
                .filter(|d| d.class_label == class)
                .filter(|d| config.score_threshold.map_or(true, |t| d.score >= t))
                .cloned()
                .collect();
            if !filtered.is_empty() {
                dets_by_image.insert(image_id.as_str(), filtered);
            }
        }

        let curve = pr_curve(
            &dets_by_image,
            &gts_by_image,
            config.iou_threshold,
            config.difficult_policy,
        );
        if curve.total_positives == 0 && dets_by_image.is_empty() {
            // Nothing to evaluate for this class.
            continue;
        }
        let ap = if curve.total_positives == 0 {
            0.0
        } else {
            average_precision(&curve, config.ap_mode)
        };
        per_class.insert(class.to_string(), ap);
    }

    let map = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().sum::<f64>() / per_class.len() as f64
    };
    Ok(EvalReport {
        map,
        per_class,
        ap_mode: config.ap_mode,
        iou_threshold: config.iou_threshold,
    })
}
