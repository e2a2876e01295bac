//! Easy-versus-hard routing: partition a test set by difficulty threshold
//! (or randomly, as the baseline) and serve each image from the fast or
//! the slow detector's cached output. Routing is strictly binary and
//! per-image; detections are never mixed within an image.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Detection, DetectorRun, DifficultyScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Easy,
    Hard,
}

/// How the test set is partitioned. In difficulty mode exactly one of the
/// requested fraction or an explicit threshold determines the split; the
/// other is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SplitPolicy {
    Difficulty {
        /// Requested easy fraction; `None` when the threshold was supplied
        /// directly.
        fraction_easy: Option<f64>,
        threshold: f64,
    },
    Random { fraction_easy: f64, seed: u64 },
}

impl SplitPolicy {
    /// The fraction the policy was asked for, when it was fraction-driven.
    pub fn requested_fraction(&self) -> Option<f64> {
        match self {
            SplitPolicy::Difficulty { fraction_easy, .. } => *fraction_easy,
            SplitPolicy::Random { fraction_easy, .. } => Some(*fraction_easy),
        }
    }
}

/// A complete easy/hard labeling of the dataset plus the policy snapshot.
/// `realized_fraction_easy` may deviate from the requested fraction when
/// duplicate scores straddle the cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub routes: BTreeMap<String, Route>,
    pub policy: SplitPolicy,
    pub realized_fraction_easy: f64,
}

impl Assignment {
    fn new(routes: BTreeMap<String, Route>, policy: SplitPolicy) -> Self {
        let easy = routes.values().filter(|r| **r == Route::Easy).count();
        let realized = if routes.is_empty() {
            0.0
        } else {
            easy as f64 / routes.len() as f64
        };
        Assignment {
            routes,
            policy,
            realized_fraction_easy: realized,
        }
    }

    pub fn route_for(&self, image_id: &str) -> Option<Route> {
        self.routes.get(image_id).copied()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn easy_count(&self) -> usize {
        self.routes.values().filter(|r| **r == Route::Easy).count()
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) || !fraction.is_finite() {
        return Err(Error::InvalidPolicy(format!(
            "fraction_easy must lie in [0, 1], got {fraction}"
        )));
    }
    Ok(())
}

/// Percentile realization of "x% easy": the threshold is the k-th smallest
/// score with `k = round(fraction * n)`, so exactly k images satisfy
/// `score <= t` when scores are distinct. With duplicate scores the cut is
/// adjusted to whichever side leaves the easy count closest to k.
pub fn threshold_for_fraction(scores: &[DifficultyScore], fraction_easy: f64) -> Result<f64> {
    check_fraction(fraction_easy)?;
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut sorted: Vec<f64> = scores.iter().map(|s| s.score).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let n = sorted.len();
    let k = (fraction_easy * n as f64).round() as usize;
    if k == 0 {
        return Ok(sorted[0] - 1.0);
    }
    let value = sorted[k - 1];
    let below = sorted.partition_point(|&s| s < value);
    let at_or_below = sorted.partition_point(|&s| s <= value);
    // Inclusive cut keeps at_or_below images easy; cutting just under the
    // tied value keeps `below`. Prefer the inclusive side on a tie.
    if at_or_below.abs_diff(k) <= below.abs_diff(k) {
        Ok(value)
    } else if below == 0 {
        Ok(sorted[0] - 1.0)
    } else {
        Ok(sorted[below - 1])
    }
}

/// The Algorithm-1 branch: easy iff the predicted difficulty does not
/// exceed the threshold (inclusive).
pub fn route(score: f64, threshold: f64) -> Route {
    if score <= threshold {
        Route::Easy
    } else {
        Route::Hard
    }
}

/// Difficulty-mode split at a fraction-derived threshold.
pub fn difficulty_split(scores: &[DifficultyScore], fraction_easy: f64) -> Result<Assignment> {
    let threshold = threshold_for_fraction(scores, fraction_easy)?;
    let routes = routes_at(scores, threshold);
    Ok(Assignment::new(
        routes,
        SplitPolicy::Difficulty {
            fraction_easy: Some(fraction_easy),
            threshold,
        },
    ))
}

/// Difficulty-mode split at a user-supplied threshold.
pub fn difficulty_split_at(scores: &[DifficultyScore], threshold: f64) -> Result<Assignment> {
    if !threshold.is_finite() {
        return Err(Error::InvalidPolicy(format!(
            "threshold must be finite, got {threshold}"
        )));
    }
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let routes = routes_at(scores, threshold);
    Ok(Assignment::new(
        routes,
        SplitPolicy::Difficulty {
            fraction_easy: None,
            threshold,
        },
    ))
}

fn routes_at(scores: &[DifficultyScore], threshold: f64) -> BTreeMap<String, Route> {
    scores
        .iter()
        .map(|s| (s.image_id.clone(), route(s.score, threshold)))
        .collect()
}

/// Random baseline: exactly `round(fraction * n)` images are marked easy,
/// chosen by a seeded uniform shuffle. Deterministic per seed.
pub fn random_split<I: AsRef<str>>(
    image_ids: &[I],
    fraction_easy: f64,
    seed: u64,
) -> Result<Assignment> {
    check_fraction(fraction_easy)?;
    let n = image_ids.len();
    let k = (fraction_easy * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut routes = BTreeMap::new();
    for (pos, idx) in order.into_iter().enumerate() {
        let route = if pos < k { Route::Easy } else { Route::Hard };
        routes.insert(image_ids[idx].as_ref().to_string(), route);
    }
    Ok(Assignment::new(
        routes,
        SplitPolicy::Random { fraction_easy, seed },
    ))
}

/// The combined output `B`: per image, the whole detection list of the
/// run the assignment selects, with a source tag per image.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchOutcome {
    pub detections: BTreeMap<String, Vec<Detection>>,
    pub sources: BTreeMap<String, Route>,
}

pub fn dispatch(
    assignment: &Assignment,
    fast: &DetectorRun,
    slow: &DetectorRun,
) -> Result<DispatchOutcome> {
    let mut detections = BTreeMap::new();
    let mut sources = BTreeMap::new();
    for (image_id, route) in &assignment.routes {
        let run = match route {
            Route::Easy => fast,
            Route::Hard => slow,
        };
        if !run.covers(image_id) {
            return Err(Error::MissingImage {
                image_id: image_id.clone(),
                detector_id: run.detector_id.clone(),
            });
        }
        detections.insert(image_id.clone(), run.detections_for(image_id).to_vec());
        sources.insert(image_id.clone(), *route);
    }
    Ok(DispatchOutcome {
        detections,
        sources,
    })
}

#[derive(Serialize, Deserialize)]
struct AssignmentLine {
    image_id: String,
    route: Route,
}

/// Renders an assignment as JSONL with the policy echoed in a `#` header.
pub fn assignment_to_string(assignment: &Assignment) -> String {
    let mut out = format!(
        "# policy: {} realized_fraction_easy: {}\n",
        serde_json::to_string(&assignment.policy).expect("policy serializes"),
        assignment.realized_fraction_easy,
    );
    for (image_id, route) in &assignment.routes {
        let line = AssignmentLine {
            image_id: image_id.clone(),
            route: *route,
        };
        out.push_str(&serde_json::to_string(&line).expect("line serializes"));
        out.push('\n');
    }
    out
}

pub fn write_assignment(assignment: &Assignment, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path.as_ref(), assignment_to_string(assignment)).map_err(|source| Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}

/// Reads an assignment file written by [`write_assignment`].
pub fn read_assignment(path: impl AsRef<Path>) -> Result<Assignment> {
    let path = path.as_ref();
    let contents = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut policy: Option<SplitPolicy> = None;
    let mut routes = BTreeMap::new();
    for (idx, line) in contents.lines().enumerate() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(json_start) = rest.find('{') {
                let json = &rest[json_start..];
                let end = json.rfind('}').map(|i| i + 1).unwrap_or(json.len());
                if let Ok(p) = serde_json::from_str::<SplitPolicy>(&json[..end]) {
                    policy = Some(p);
                }
            }
            continue;
        }
        let rec: AssignmentLine =
            serde_json::from_str(trimmed).map_err(|e| Error::MalformedRecord {
                path: path.display().to_string(),
                line: lineno,
                message: e.to_string(),
            })?;
        routes.insert(rec.image_id, rec.route);
    }
    let policy = policy.ok_or_else(|| Error::MalformedRecord {
        path: path.display().to_string(),
        line: 1,
        message: "missing `# policy:` header".to_string(),
    })?;
    Ok(Assignment::new(routes, policy))
}
