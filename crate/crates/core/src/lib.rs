//! Accuracy-latency trade-off toolkit for cached object-detector runs.
//!
//! Given precomputed detections from a fast and a slow detector, per-image
//! feature vectors and difficulty annotations, this crate:
//!
//! - evaluates detections VOC-style (IoU matching, PR curves, per-class AP
//!   and mAP),
//! - trains a linear nu-SVR to predict per-image difficulty from L2
//!   normalized features, scored by Kendall's tau,
//! - partitions a test set into easy and hard images by difficulty
//!   threshold (or randomly, as the baseline) and dispatches each image to
//!   the fast or slow run,
//! - sweeps split fractions, accounts detection and predictor time, and
//!   renders the trade-off as CSV or a markdown table.
//!
//! Everything is deterministic: seeded randomness, ordered maps, stable
//! formatting. No detector is ever executed here; runs are ingested as
//! JSON Lines files.

pub mod difficulty;
pub mod error;
pub mod eval;
pub mod harness;
pub mod io;
pub mod kendall;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod router;
pub mod types;

pub use difficulty::{
    evaluate_predictor, l2_normalize, load_model, save_model, train_nu_svr, DifficultyModel,
    SvrConfig, TrainOutcome,
};
pub use error::{Error, Result};
pub use eval::{
    average_precision, iou, match_detections, mean_average_precision, pr_curve, ApMode,
    DifficultPolicy, EvalConfig, EvalReport, MatchOutcome, PRCurve, PrPoint, Verdict,
};
pub use harness::{
    compare_strategies, evaluate_split, points_from_csv, render_report, sweep, HarnessConfig,
    ReportFormat, SplitEvaluation, Strategy, TradeoffPoint,
};
pub use io::{
    load_dataset, load_detections, load_detector_run, load_difficulty_scores, load_features,
    load_latencies, to_jsonl, write_jsonl,
};
pub use kendall::kendall_tau;
pub use router::{
    difficulty_split, difficulty_split_at, dispatch, random_split, read_assignment, route,
    threshold_for_fraction, write_assignment, Assignment, DispatchOutcome, Route, SplitPolicy,
};
pub use types::{
    BoundingBox, Dataset, Detection, DetectorRun, DifficultyScore, FeatureRecord,
    GroundTruthObject, ImageRecord, LatencySource,
};
