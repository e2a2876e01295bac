//! Experimental protocol around the router: evaluate the combined
//! detector output at each split fraction, account for detection and
//! predictor time, average the random baseline over seeded repeats, and
//! render the accuracy/latency trade-off as CSV or a transposed markdown
//! table (fractions as columns, metric rows).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{mean_average_precision, EvalConfig, EvalReport};
use crate::router::{difficulty_split, dispatch, random_split, Assignment, SplitPolicy};
use crate::types::{Dataset, DetectorRun, DifficultyScore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Difficulty,
    Random,
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strategy::Difficulty => write!(f, "difficulty"),
            Strategy::Random => write!(f, "random"),
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "difficulty" => Ok(Strategy::Difficulty),
            "random" => Ok(Strategy::Random),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

/// One table cell group: a strategy at a fraction, with accuracy and
/// per-image time accounting. `total_time_s` is always the exact sum of
/// the detection and predictor components.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub strategy: Strategy,
    pub fraction_easy: f64,
    pub map: f64,
    /// Standard deviation of mAP over random repeats; absent in
    /// difficulty mode.
    pub map_std: Option<f64>,
    pub detection_time_s: f64,
    pub predictor_time_s: f64,
    pub total_time_s: f64,
}

impl TradeoffPoint {
    pub fn new(
        strategy: Strategy,
        fraction_easy: f64,
        map: f64,
        map_std: Option<f64>,
        detection_time_s: f64,
        predictor_time_s: f64,
    ) -> Self {
        TradeoffPoint {
            strategy,
            fraction_easy,
            map,
            map_std,
            detection_time_s,
            predictor_time_s,
            total_time_s: detection_time_s + predictor_time_s,
        }
    }
}

/// Sweep configuration. The default fractions mirror the five table
/// columns; the 0.05 s predictor cost is the paper-reported per-image
/// figure, charged only at interior fractions unless
/// `charge_predictor_always` is set (the endpoints run a single detector
/// on everything, so no routing decision is needed).
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessConfig {
    pub fractions: Vec<f64>,
    pub repeats: usize,
    pub seed: u64,
    pub predictor_cost: f64,
    pub charge_predictor_always: bool,
    pub eval: EvalConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            fractions: vec![1.0, 0.75, 0.5, 0.25, 0.0],
            repeats: 5,
            seed: 0,
            predictor_cost: 0.05,
            charge_predictor_always: false,
            eval: EvalConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be at least 1".to_string()));
        }
        if !(self.predictor_cost >= 0.0 && self.predictor_cost.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "predictor_cost must be non-negative, got {}",
                self.predictor_cost
            )));
        }
        if self.fractions.is_empty() {
            return Err(Error::InvalidConfig("no fractions to sweep".to_string()));
        }
        for f in &self.fractions {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::InvalidConfig(format!(
                    "fraction {f} outside [0, 1]"
                )));
            }
        }
        self.eval.validate()
    }
}

/// A single evaluated split: the trade-off point plus the full evaluation
/// report and the assignment it was computed from.
#[derive(Debug, Clone)]
pub struct SplitEvaluation {
    pub point: TradeoffPoint,
    pub report: EvalReport,
    pub assignment: Assignment,
}

/// Evaluates one assignment end to end: dispatch, combined mAP, mean
/// per-image detection latency of the runs actually used, and predictor
/// overhead. The predictor is charged only for difficulty-mode interior
/// fractions (the table endpoints need no routing decision), unless
/// `charge_predictor_always` asks otherwise.
pub fn evaluate_split(
    dataset: &Dataset,
    fast: &DetectorRun,
    slow: &DetectorRun,
    assignment: &Assignment,
    config: &HarnessConfig,
) -> Result<SplitEvaluation> {
    config.validate()?;
    if assignment.len() != dataset.len() || dataset.image_ids().any(|id| assignment.route_for(id).is_none())
    {
        return Err(Error::InvalidPolicy(
            "assignment does not cover the dataset exactly".to_string(),
        ));
    }

    let outcome = dispatch(assignment, fast, slow)?;
    let report = mean_average_precision(&outcome.detections, dataset, &config.eval)?;

    let mut latency_sum = 0.0;
    for (image_id, route) in &assignment.routes {
        let run = match route {
            crate::router::Route::Easy => fast,
            crate::router::Route::Hard => slow,
        };
        latency_sum += run
            .latency_for(image_id)
            .ok_or_else(|| Error::MissingImage {
                image_id: image_id.clone(),
                detector_id: run.detector_id.clone(),
            })?;
    }
    let detection_time = latency_sum / assignment.len() as f64;

    let (strategy, fraction) = match assignment.policy {
        SplitPolicy::Difficulty { fraction_easy, .. } => (
            Strategy::Difficulty,
            fraction_easy.unwrap_or(assignment.realized_fraction_easy),
        ),
        SplitPolicy::Random { fraction_easy, .. } => (Strategy::Random, fraction_easy),
    };
    let interior = fraction > 0.0 && fraction < 1.0;
    let predictor_time = if strategy == Strategy::Difficulty
        && (interior || config.charge_predictor_always)
    {
        config.predictor_cost
    } else {
        0.0
    };

    Ok(SplitEvaluation {
        point: TradeoffPoint::new(strategy, fraction, report.map, None, detection_time, predictor_time),
        report,
        assignment: assignment.clone(),
    })
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    var.sqrt()
}

/// Full sweep: for every fraction, one difficulty-mode point and one
/// random-mode point averaged over `repeats` seeded assignments (seeds
/// `seed, seed+1, ...`). Points are emitted fraction-descending,
/// difficulty before random. Deterministic for a fixed config.
pub fn sweep(
    dataset: &Dataset,
    fast: &DetectorRun,
    slow: &DetectorRun,
    difficulty_scores: &[DifficultyScore],
    config: &HarnessConfig,
) -> Result<Vec<TradeoffPoint>> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }

    // Restrict scores to the dataset; every dataset image needs one.
    let by_id: BTreeMap<&str, f64> = difficulty_scores
        .iter()
        .map(|s| (s.image_id.as_str(), s.score))
        .collect();
    let mut scores = Vec::with_capacity(dataset.len());
    for id in dataset.image_ids() {
        let score = by_id.get(id).ok_or_else(|| Error::MissingScore {
            image_id: id.to_string(),
        })?;
        scores.push(DifficultyScore {
            image_id: id.to_string(),
            score: *score,
        });
    }
    let image_ids: Vec<&str> = dataset.image_ids().collect();

    let mut fractions = config.fractions.clone();
    fractions.sort_by(|a, b| b.partial_cmp(a).expect("finite fractions"));
    fractions.dedup();

    let mut points = Vec::with_capacity(fractions.len() * 2);
    for &fraction in &fractions {
        let assignment = difficulty_split(&scores, fraction)?;
        points.push(evaluate_split(dataset, fast, slow, &assignment, config)?.point);

        let mut maps = Vec::with_capacity(config.repeats);
        let mut detection_times = Vec::with_capacity(config.repeats);
        for repeat in 0..config.repeats {
            let seed = config.seed + repeat as u64;
            let assignment = random_split(&image_ids, fraction, seed)?;
            let eval = evaluate_split(dataset, fast, slow, &assignment, config)?;
            maps.push(eval.point.map);
            detection_times.push(eval.point.detection_time_s);
        }
        let map = maps.iter().sum::<f64>() / maps.len() as f64;
        let detection_time = detection_times.iter().sum::<f64>() / detection_times.len() as f64;
        points.push(TradeoffPoint::new(
            Strategy::Random,
            fraction,
            map,
            Some(sample_std(&maps, map)),
            detection_time,
            0.0,
        ));
    }
    Ok(points)
}

/// Signed per-fraction difference (difficulty mAP - random mAP), fraction
/// descending. Requires each strategy to cover the same fractions.
pub fn compare_strategies(points: &[TradeoffPoint]) -> Result<Vec<(f64, f64)>> {
    let mut difficulty: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut random: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for p in points {
        let key = p.fraction_easy.to_bits();
        match p.strategy {
            Strategy::Difficulty => difficulty.insert(key, (p.fraction_easy, p.map)),
            Strategy::Random => random.insert(key, (p.fraction_easy, p.map)),
        };
    }
    if difficulty.len() != random.len()
        || difficulty.keys().any(|k| !random.contains_key(k))
    {
        return Err(Error::UnmatchedFractions(format!(
            "difficulty fractions {:?} vs random fractions {:?}",
            difficulty.values().map(|v| v.0).collect::<Vec<_>>(),
            random.values().map(|v| v.0).collect::<Vec<_>>(),
        )));
    }
    let mut deltas: Vec<(f64, f64)> = difficulty
        .iter()
        .map(|(key, (fraction, d_map))| (*fraction, d_map - random[key].1))
        .collect();
    deltas.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite fractions"));
    Ok(deltas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidConfig(format!("unknown format {other:?}"))),
        }
    }
}

fn format_fraction(fraction: f64) -> String {
    let repr = format!("{fraction}");
    repr
}

fn percent_label(fraction: f64) -> String {
    let easy = fraction * 100.0;
    let hard = 100.0 - easy;
    let fmt = |p: f64| {
        if (p - p.round()).abs() < 1e-9 {
            format!("{:.0}%", p)
        } else {
            format!("{:.1}%", p)
        }
    };
    format!("{}-{}", fmt(easy), fmt(hard))
}

fn predictor_cell(point: &TradeoffPoint) -> String {
    if point.strategy == Strategy::Difficulty && point.predictor_time_s == 0.0 {
        "-".to_string()
    } else {
        format!("{:.2}", point.predictor_time_s)
    }
}

/// Renders points as CSV (one row per point) or as the transposed
/// markdown table used by the papers in this area: one column per
/// fraction, metric rows, mAP to 4 decimals, seconds to 2, and `-` in
/// predictor-time cells where the predictor does not run.
pub fn render_report(points: &[TradeoffPoint], format: ReportFormat) -> Result<String> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    match format {
        ReportFormat::Csv => Ok(render_csv(points)),
        ReportFormat::Markdown => Ok(render_markdown(points)),
    }
}

fn render_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from(
        "strategy,fraction_easy,map,map_std,detection_time_s,predictor_time_s,total_time_s\n",
    );
    for p in points {
        let std = p.map_std.map(|s| format!("{s:.4}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{:.4},{},{:.2},{},{:.2}\n",
            p.strategy,
            format_fraction(p.fraction_easy),
            p.map,
            std,
            p.detection_time_s,
            predictor_cell(p),
            p.total_time_s,
        ));
    }
    out
}

fn render_markdown(points: &[TradeoffPoint]) -> String {
    // Column order: fractions in first-appearance order.
    let mut fractions: Vec<f64> = Vec::new();
    for p in points {
        if !fractions.iter().any(|f| f.to_bits() == p.fraction_easy.to_bits()) {
            fractions.push(p.fraction_easy);
        }
    }
    let find = |strategy: Strategy, fraction: f64| {
        points.iter().find(|p| {
            p.strategy == strategy && p.fraction_easy.to_bits() == fraction.to_bits()
        })
    };
    let has_random = points.iter().any(|p| p.strategy == Strategy::Random);
    let has_difficulty = points.iter().any(|p| p.strategy == Strategy::Difficulty);
    // Time rows follow the difficulty method when present.
    let time_strategy = if has_difficulty {
        Strategy::Difficulty
    } else {
        Strategy::Random
    };

    let mut out = String::new();
    out.push_str("| |");
    for f in &fractions {
        out.push_str(&format!(" {} |", percent_label(*f)));
    }
    out.push('\n');
    out.push_str("| --- |");
    for _ in &fractions {
        out.push_str(" --- |");
    }
    out.push('\n');

    let mut push_row = |label: &str, cell: &dyn Fn(f64) -> String| {
        out.push_str(&format!("| {label} |"));
        for f in &fractions {
            out.push_str(&format!(" {} |", cell(*f)));
        }
        out.push('\n');
    };

    if has_random {
        push_row("Random Split (mAP)", &|f| {
            find(Strategy::Random, f)
                .map(|p| format!("{:.4}", p.map))
                .unwrap_or_else(|| "-".to_string())
        });
    }
    if has_difficulty {
        push_row("Easy-versus-Hard Split (mAP)", &|f| {
            find(Strategy::Difficulty, f)
                .map(|p| format!("{:.4}", p.map))
                .unwrap_or_else(|| "-".to_string())
        });
    }
    push_row("Image Difficulty Prediction Time (s)", &|f| {
        find(time_strategy, f)
            .map(|p| predictor_cell(p))
            .unwrap_or_else(|| "-".to_string())
    });
    push_row("Object Detection Time (s)", &|f| {
        find(time_strategy, f)
            .map(|p| format!("{:.2}", p.detection_time_s))
            .unwrap_or_else(|| "-".to_string())
    });
    push_row("Total Time (s)", &|f| {
        find(time_strategy, f)
            .map(|p| format!("{:.2}", p.total_time_s))
            .unwrap_or_else(|| "-".to_string())
    });
    out
}

/// Parses points back from the CSV emitted by [`render_report`]. The total
/// time column is recomputed from the components so the sum invariant
/// holds exactly.
pub fn points_from_csv(text: &str) -> Result<Vec<TradeoffPoint>> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::MalformedRecord {
                path: "<csv>".to_string(),
                line: idx + 1,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::MalformedRecord {
                path: "<csv>".to_string(),
                line: idx + 1,
                message: format!("bad {what}: {s:?}"),
            })
        };
        let strategy: Strategy = fields[0].parse()?;
        let fraction = parse(fields[1], "fraction")?;
        let map = parse(fields[2], "map")?;
        let map_std = if fields[3].is_empty() {
            None
        } else {
            Some(parse(fields[3], "map_std")?)
        };
        let detection = parse(fields[4], "detection_time_s")?;
        let predictor = if fields[5] == "-" {
            0.0
        } else {
            parse(fields[5], "predictor_time_s")?
        };
        points.push(TradeoffPoint::new(
            strategy, fraction, map, map_std, detection, predictor,
        ));
    }
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{BoundingBox, Detection, GroundTruthObject, ImageRecord, LatencySource};

    fn paper_table1_points() -> Vec<TradeoffPoint> {
        let fractions = [1.0, 0.75, 0.5, 0.25, 0.0];
        let random_map = [0.6668, 0.6895, 0.7131, 0.7450, 0.7837];
        let evh_map = [0.6668, 0.6981, 0.7431, 0.7640, 0.7837];
        let det_time = [0.07, 2.38, 4.08, 6.07, 7.74];
        let mut points = Vec::new();
        for i in 0..5 {
            let interior = fractions[i] > 0.0 && fractions[i] < 1.0;
            let pred = if interior { 0.05 } else { 0.0 };
            points.push(TradeoffPoint::new(
                Strategy::Difficulty,
                fractions[i],
                evh_map[i],
                None,
                det_time[i],
                pred,
            ));
            points.push(TradeoffPoint::new(
                Strategy::Random,
                fractions[i],
                random_map[i],
                Some(0.003),
                det_time[i],
                0.0,
            ));
        }
        points
    }

    #[test]
    fn markdown_reproduces_the_recorded_rows() {
        let md = render_report(&paper_table1_points(), ReportFormat::Markdown).unwrap();
        assert!(md.contains(
            "| Easy-versus-Hard Split (mAP) | 0.6668 | 0.6981 | 0.7431 | 0.7640 | 0.7837 |"
        ));
        assert!(md.contains(
            "| Random Split (mAP) | 0.6668 | 0.6895 | 0.7131 | 0.7450 | 0.7837 |"
        ));
        assert!(md.contains(
            "| Image Difficulty Prediction Time (s) | - | 0.05 | 0.05 | 0.05 | - |"
        ));
        assert!(md.contains("| Object Detection Time (s) | 0.07 | 2.38 | 4.08 | 6.07 | 7.74 |"));
        assert!(md.contains("| Total Time (s) | 0.07 | 2.43 | 4.13 | 6.12 | 7.74 |"));
        assert!(md.contains("| 100%-0% | 75%-25% | 50%-50% | 25%-75% | 0%-100% |"));
    }

    #[test]
    fn single_point_renders_one_column() {
        let p = TradeoffPoint::new(Strategy::Difficulty, 0.5, 0.7431, None, 4.08, 0.05);
        let md = render_report(&[p], ReportFormat::Markdown).unwrap();
        assert!(md.contains("| 50%-50% |"));
        assert!(!md.contains("Random Split"));
        assert!(render_report(&[], ReportFormat::Markdown).is_err());
    }

    #[test]
    fn csv_round_trips_through_the_parser() {
        let points = paper_table1_points();
        let csv = render_report(&points, ReportFormat::Csv).unwrap();
        let parsed = points_from_csv(&csv).unwrap();
        assert_eq!(parsed.len(), points.len());
        for (a, b) in parsed.iter().zip(&points) {
            assert_eq!(a.strategy, b.strategy);
            assert_eq!(a.fraction_easy, b.fraction_easy);
            assert!((a.map - b.map).abs() < 1e-4);
            assert!((a.total_time_s - (a.detection_time_s + a.predictor_time_s)).abs() < 1e-12);
        }
    }

    #[test]
    fn deltas_match_the_recorded_boost() {
        let deltas = compare_strategies(&paper_table1_points()).unwrap();
        assert_eq!(deltas.len(), 5);
        let at_half = deltas.iter().find(|(f, _)| *f == 0.5).unwrap().1;
        assert!((at_half - 0.0300).abs() < 1e-12);
        assert_eq!(deltas[0].1, 0.0);
        assert_eq!(deltas[4].1, 0.0);
    }

    #[test]
    fn unmatched_fractions_are_an_error() {
        let mut points = paper_table1_points();
        points.retain(|p| !(p.strategy == Strategy::Random && p.fraction_easy == 0.5));
        assert!(matches!(
            compare_strategies(&points),
            Err(Error::UnmatchedFractions(_))
        ));
    }

    fn tiny_world() -> (Dataset, DetectorRun, DetectorRun, Vec<DifficultyScore>) {
        let bbox = |x: f64| BoundingBox::new(x, 0.0, x + 10.0, 10.0).unwrap();
        let images: Vec<ImageRecord> = (0..4)
            .map(|i| ImageRecord {
                image_id: format!("img{i}"),
                width: 100,
                height: 100,
                objects: vec![GroundTruthObject {
                    class_label: "car".into(),
                    bbox: bbox(i as f64 * 20.0),
                    difficult: false,
                }],
            })
            .collect();
        let dataset = Dataset::new(images).unwrap();

        // Slow: perfect everywhere. Fast: wrong box on the two hardest.
        let mut fast = BTreeMap::new();
        let mut slow = BTreeMap::new();
        for i in 0..4 {
            let id = format!("img{i}");
            let good = Detection {
                image_id: id.clone(),
                class_label: "car".into(),
                score: 0.9,
                bbox: bbox(i as f64 * 20.0),
            };
            let bad = Detection {
                bbox: BoundingBox::new(80.0, 80.0, 90.0, 90.0).unwrap(),
                ..good.clone()
            };
            slow.insert(id.clone(), vec![good.clone()]);
            fast.insert(id, vec![if i < 2 { good } else { bad }]);
        }
        let fast = DetectorRun::new("fast", fast, LatencySource::Constant(0.07)).unwrap();
        let slow = DetectorRun::new("slow", slow, LatencySource::Constant(7.74)).unwrap();
        let scores: Vec<DifficultyScore> = (0..4)
            .map(|i| DifficultyScore {
                image_id: format!("img{i}"),
                score: i as f64 / 10.0,
            })
            .collect();
        (dataset, fast, slow, scores)
    }

    #[test]
    fn boundary_fractions_equal_standalone_runs() {
        let (dataset, fast, slow, scores) = tiny_world();
        let config = HarnessConfig::default();

        let all_easy = difficulty_split(&scores, 1.0).unwrap();
        let eval = evaluate_split(&dataset, &fast, &slow, &all_easy, &config).unwrap();
        let standalone =
            mean_average_precision(&fast.detections, &dataset, &config.eval).unwrap();
        assert_eq!(eval.report, standalone);
        assert_eq!(eval.point.detection_time_s, 0.07);
        assert_eq!(eval.point.predictor_time_s, 0.0);
        assert_eq!(eval.point.total_time_s, 0.07);

        let all_hard = difficulty_split(&scores, 0.0).unwrap();
        let eval = evaluate_split(&dataset, &fast, &slow, &all_hard, &config).unwrap();
        let standalone =
            mean_average_precision(&slow.detections, &dataset, &config.eval).unwrap();
        assert_eq!(eval.report, standalone);
        assert_eq!(eval.point.detection_time_s, 7.74);
    }

    #[test]
    fn interior_time_is_the_latency_blend_plus_predictor() {
        let (dataset, fast, slow, scores) = tiny_world();
        let config = HarnessConfig::default();
        let half = difficulty_split(&scores, 0.5).unwrap();
        let eval = evaluate_split(&dataset, &fast, &slow, &half, &config).unwrap();
        let expected = 0.5 * 0.07 + 0.5 * 7.74 + 0.05;
        assert!((eval.point.total_time_s - expected).abs() < 1e-12);
        assert_eq!(eval.point.predictor_time_s, 0.05);
    }

    #[test]
    fn charge_always_flag_covers_endpoints() {
        let (dataset, fast, slow, scores) = tiny_world();
        let config = HarnessConfig {
            charge_predictor_always: true,
            ..HarnessConfig::default()
        };
        let all_easy = difficulty_split(&scores, 1.0).unwrap();
        let eval = evaluate_split(&dataset, &fast, &slow, &all_easy, &config).unwrap();
        assert_eq!(eval.point.predictor_time_s, 0.05);
    }

    #[test]
    fn sweep_emits_both_strategies_per_fraction_and_is_deterministic() {
        let (dataset, fast, slow, scores) = tiny_world();
        let config = HarnessConfig::default();
        let points = sweep(&dataset, &fast, &slow, &scores, &config).unwrap();
        assert_eq!(points.len(), 10);
        for pair in points.chunks(2) {
            assert_eq!(pair[0].strategy, Strategy::Difficulty);
            assert_eq!(pair[1].strategy, Strategy::Random);
            assert_eq!(pair[0].fraction_easy, pair[1].fraction_easy);
            assert!(pair[0].map_std.is_none());
            assert!(pair[1].map_std.is_some());
        }
        // Fractions descend.
        let fractions: Vec<f64> = points.iter().step_by(2).map(|p| p.fraction_easy).collect();
        assert_eq!(fractions, vec![1.0, 0.75, 0.5, 0.25, 0.0]);

        let again = sweep(&dataset, &fast, &slow, &scores, &config).unwrap();
        assert_eq!(points, again);
        assert_eq!(
            render_report(&points, ReportFormat::Csv).unwrap(),
            render_report(&again, ReportFormat::Csv).unwrap()
        );
    }

    #[test]
    fn sweep_requires_scores_for_every_image() {
        let (dataset, fast, slow, mut scores) = tiny_world();
        scores.pop();
        let err = sweep(&dataset, &fast, &slow, &scores, &HarnessConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MissingScore { .. }));
    }
}
