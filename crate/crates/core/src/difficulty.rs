//! Image-difficulty regression: L2 feature normalization and a linear
//! nu-SVR trained by sequential minimal optimization on the dual.
//!
//! The primal problem over (w, b, epsilon, xi, xi*):
//!
//! ```text
//! minimize  1/2 ||w||^2 + C * (nu * eps + (1/n) * sum(xi_i + xi*_i))
//! subject to  (w.x_i + b) - y_i <= eps + xi_i
//!             y_i - (w.x_i + b) <= eps + xi*_i
//!             xi_i, xi*_i >= 0,  eps >= 0
//! ```
//!
//! with the tube width epsilon optimized jointly. The dual is solved over
//! the paired multipliers (alpha_i, alpha*_i) in [0, C/n] with the group
//! sums each fixed at C*nu/2; nu thereby bounds the fraction of tube
//! violations from above and the fraction of support vectors from below.
//! The solver is a maximal-violating-pair coordinate ascent: the stopping
//! contract is the KKT violation falling below the configured tolerance,
//! not any particular pivot order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kendall::kendall_tau;
use crate::types::{DifficultyScore, FeatureRecord};

/// Rescales a non-zero vector to unit Euclidean norm.
pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            image_id: "<vector>".to_string(),
            field: "feature".to_string(),
        });
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Solver configuration. The paper-facing defaults are conventional:
/// nu = 0.5, C = 1, tolerance 1e-6, at most 1e5 iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrConfig {
    pub nu: f64,
    pub c: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvrConfig {
    fn default() -> Self {
        SvrConfig {
            nu: 0.5,
            c: 1.0,
            tolerance: 1e-6,
            max_iterations: 100_000,
        }
    }
}

impl SvrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "nu must lie in (0, 1], got {}",
                self.nu
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "c must be a positive real, got {}",
                self.c
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be a positive real, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Trained linear difficulty model: `P(x) = w . normalize(x) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub nu: f64,
    pub c: f64,
    /// Whether inputs are L2-normalized before the dot product (always
    /// true for models trained by this crate).
    pub normalized_inputs: bool,
}

impl DifficultyModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Predicted difficulty for a raw feature vector; the vector is
    /// L2-normalized internally when the model expects normalized inputs.
    pub fn predict(&self, feature: &[f64]) -> Result<f64> {
        self.check_dim(feature)?;
        if self.normalized_inputs {
            let unit = l2_normalize(feature)?;
            Ok(self.dot(&unit))
        } else {
            Ok(self.dot(feature))
        }
    }

    /// Predicted difficulty for a vector the caller has already normalized.
    pub fn predict_pre_normalized(&self, feature: &[f64]) -> Result<f64> {
        self.check_dim(feature)?;
        Ok(self.dot(feature))
    }

    fn check_dim(&self, feature: &[f64]) -> Result<()> {
        if feature.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                image_id: "<feature>".to_string(),
                expected: self.weights.len(),
                got: feature.len(),
            });
        }
        Ok(())
    }

    fn dot(&self, feature: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(feature)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }
}

// Wire format of the model file.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    w: Vec<f64>,
    b: f64,
    nu: f64,
    c: f64,
    dim: usize,
    normalized_inputs: bool,
}

pub fn save_model(model: &DifficultyModel, path: impl AsRef<Path>) -> Result<()> {
    let file = ModelFile {
        w: model.weights.clone(),
        b: model.bias,
        nu: model.nu,
        c: model.c,
        dim: model.weights.len(),
        normalized_inputs: model.normalized_inputs,
    };
    let json = serde_json::to_string(&file).expect("model serializes");
    std::fs::write(path.as_ref(), json + "\n").map_err(|source| Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<DifficultyModel> {
    let path = path.as_ref();
    let contents = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ModelFile = serde_json::from_str(&contents).map_err(|e| Error::MalformedRecord {
        path: path.display().to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    if file.dim != file.w.len() {
        return Err(Error::MalformedRecord {
            path: path.display().to_string(),
            line: 1,
            message: format!("dim {} does not match weight count {}", file.dim, file.w.len()),
        });
    }
    Ok(DifficultyModel {
        weights: file.w,
        bias: file.b,
        nu: file.nu,
        c: file.c,
        normalized_inputs: file.normalized_inputs,
    })
}

/// Everything the trainer knows at convergence. `support_coefficients`
/// holds beta_i = alpha*_i - alpha_i, so `w = sum beta_i x_i`.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: DifficultyModel,
    /// Optimized tube half-width.
    pub epsilon: f64,
    pub iterations: usize,
    /// KKT violation at the final iterate.
    pub final_violation: f64,
    /// Dual objective `y . beta - 1/2 ||w||^2` at the solution.
    pub dual_objective: f64,
    pub support_coefficients: Vec<f64>,
}

impl TrainOutcome {
    /// Count of support vectors (non-zero dual coefficient).
    pub fn support_vector_count(&self) -> usize {
        let scale = self.model.c / self.support_coefficients.len().max(1) as f64;
        self.support_coefficients
            .iter()
            .filter(|b| b.abs() > scale * 1e-8)
            .count()
    }
}

struct Smo<'a> {
    features: &'a [Vec<f64>],
    targets: &'a [f64],
    sqnorms: Vec<f64>,
    /// alpha* group: pushes predictions up.
    up: Vec<f64>,
    /// alpha group: pushes predictions down.
    dn: Vec<f64>,
    w: Vec<f64>,
    fx: Vec<f64>,
    box_limit: f64,
}

impl<'a> Smo<'a> {
    fn new(features: &'a [Vec<f64>], targets: &'a [f64], config: &SvrConfig) -> Self {
        let n = features.len();
        let dim = features[0].len();
        let box_limit = config.c / n as f64;

        // Fill both groups identically with total mass C*nu/2 each, so the
        // initial coefficient vector is zero and the equality constraints
        // hold from the start.
        let mut up = vec![0.0; n];
        let mut remaining = config.c * config.nu / 2.0;
        for value in up.iter_mut() {
            let take = remaining.min(box_limit);
            *value = take;
            remaining -= take;
            if remaining <= 0.0 {
                break;
            }
        }
        let dn = up.clone();

        Smo {
            features,
            targets,
            sqnorms: features
                .iter()
                .map(|x| x.iter().map(|v| v * v).sum())
                .collect(),
            up,
            dn,
            w: vec![0.0; dim],
            fx: vec![0.0; n],
            box_limit,
        }
    }

    fn refresh_fx(&mut self) {
        for (i, x) in self.features.iter().enumerate() {
            self.fx[i] = dot(&self.w, x);
        }
    }

    /// Maximal violating pair of one group. `grad(i)` is the dual gradient
    /// of that group's variable i. Returns (increase, decrease, violation).
    fn select_pair(
        &self,
        values: &[f64],
        grad: impl Fn(usize) -> f64,
    ) -> Option<(usize, usize, f64)> {
        let mut best_up: Option<(usize, f64)> = None;
        let mut best_dn: Option<(usize, f64)> = None;
        for i in 0..values.len() {
            let g = grad(i);
            if values[i] < self.box_limit && best_up.map_or(true, |(_, bg)| g < bg) {
                best_up = Some((i, g));
            }
            if values[i] > 0.0 && best_dn.map_or(true, |(_, bg)| g > bg) {
                best_dn = Some((i, g));
            }
        }
        match (best_up, best_dn) {
            (Some((iu, gu)), Some((id, gd))) if iu != id => Some((iu, id, gd - gu)),
            _ => None,
        }
    }

    /// One pairwise step inside a group: variable `inc` grows and `dec`
    /// shrinks by the same clipped amount; `sign` is +1 for the alpha*
    /// group and -1 for the alpha group (direction of the induced change
    /// in beta).
    fn step(&mut self, inc: usize, dec: usize, violation: f64, sign: f64) {
        let curv = (self.sqnorms[inc] + self.sqnorms[dec]
            - 2.0 * dot(&self.features[inc], &self.features[dec]))
        .max(1e-12);
        let values = if sign > 0.0 { &mut self.up } else { &mut self.dn };
        let mut delta = violation / curv;
        delta = delta.min(self.box_limit - values[inc]).min(values[dec]);
        values[inc] += delta;
        values[dec] -= delta;
        for d in 0..self.w.len() {
            self.w[d] += sign * delta * (self.features[inc][d] - self.features[dec][d]);
        }
    }

    fn solve(mut self, config: &SvrConfig) -> Result<TrainOutcome> {
        let n = self.features.len();
        let mut iterations = 0usize;
        let mut violation;
        loop {
            self.refresh_fx();
            // Gradient of the dual wrt alpha*_i is fx_i - y_i; wrt alpha_i
            // it is y_i - fx_i.
            let up_pair = self.select_pair(&self.up, |i| self.fx[i] - self.targets[i]);
            let dn_pair = self.select_pair(&self.dn, |i| self.targets[i] - self.fx[i]);
            let vu = up_pair.map_or(0.0, |(_, _, v)| v);
            let vd = dn_pair.map_or(0.0, |(_, _, v)| v);
            violation = vu.max(vd);
            if violation <= config.tolerance {
                break;
            }
            if iterations >= config.max_iterations {
                return Err(Error::NonConvergence {
                    iterations,
                    violation,
                });
            }
            if vu >= vd {
                let (inc, dec, v) = up_pair.expect("positive violation implies a pair");
                self.step(inc, dec, v, 1.0);
            } else {
                let (inc, dec, v) = dn_pair.expect("positive violation implies a pair");
                self.step(inc, dec, v, -1.0);
            }
            iterations += 1;
        }

        // Recover b and epsilon from the group multipliers:
        // lambda_up = -(b + eps) on free alpha* points, lambda_dn = b - eps
        // on free alpha points.
        let lambda_up = self.group_multiplier(&self.up, |i| self.fx[i] - self.targets[i]);
        let lambda_dn = self.group_multiplier(&self.dn, |i| self.targets[i] - self.fx[i]);
        let bias = (lambda_dn - lambda_up) / 2.0;
        let epsilon = (-(lambda_dn + lambda_up) / 2.0).max(0.0);

        let beta: Vec<f64> = (0..n).map(|i| self.up[i] - self.dn[i]).collect();
        let dual_objective = beta
            .iter()
            .zip(self.targets)
            .map(|(b, y)| b * y)
            .sum::<f64>()
            - 0.5 * dot(&self.w, &self.w);

        Ok(TrainOutcome {
            model: DifficultyModel {
                weights: self.w,
                bias,
                nu: config.nu,
                c: config.c,
                normalized_inputs: true,
            },
            epsilon,
            iterations,
            final_violation: violation,
            dual_objective,
            support_coefficients: beta,
        })
    }

    fn group_multiplier(&self, values: &[f64], grad: impl Fn(usize) -> f64) -> f64 {
        let margin = self.box_limit * 1e-9;
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..values.len() {
            if values[i] > margin && values[i] < self.box_limit - margin {
                sum += grad(i);
                count += 1;
            }
        }
        if count > 0 {
            return sum / count as f64;
        }
        // No free variable: take the midpoint of the interval the KKT
        // inequalities admit.
        let mut hi = f64::INFINITY;
        let mut lo = f64::NEG_INFINITY;
        for i in 0..values.len() {
            if values[i] <= margin {
                hi = hi.min(grad(i));
            } else {
                lo = lo.max(grad(i));
            }
        }
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + hi) / 2.0,
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains a linear nu-SVR on (already normalized) feature vectors.
/// Deterministic: identical data order and config produce a bitwise
/// identical model.
pub fn train_nu_svr(
    features: &[Vec<f64>],
    targets: &[f64],
    config: &SvrConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if features.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: features.len(),
        });
    }
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: targets.len(),
        });
    }
    let dim = features[0].len();
    for (i, x) in features.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                image_id: format!("sample {i}"),
                expected: dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                image_id: format!("sample {i}"),
                field: "feature".to_string(),
            });
        }
    }
    if let Some(i) = targets.iter().position(|y| !y.is_finite()) {
        return Err(Error::NonFinite {
            image_id: format!("sample {i}"),
            field: "target".to_string(),
        });
    }
    if dim == 0 {
        return Err(Error::InvalidConfig(
            "features must have at least one dimension".to_string(),
        ));
    }

    Smo::new(features, targets, config).solve(config)
}

/// Kendall's tau-b between model predictions and ground-truth difficulty
/// scores, matched by image id.
pub fn evaluate_predictor(
    model: &DifficultyModel,
    features: &[FeatureRecord],
    ground_truth: &[DifficultyScore],
) -> Result<f64> {
    use std::collections::BTreeMap;
    let truth: BTreeMap<&str, f64> = ground_truth
        .iter()
        .map(|s| (s.image_id.as_str(), s.score))
        .collect();
    let mut predicted = Vec::with_capacity(features.len());
    let mut actual = Vec::with_capacity(features.len());
    for rec in features {
        let target = truth
            .get(rec.image_id.as_str())
            .ok_or_else(|| Error::MissingScore {
                image_id: rec.image_id.clone(),
            })?;
        predicted.push(model.predict(&rec.vector)?);
        actual.push(*target);
    }
    kendall_tau(&predicted, &actual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn l2_normalize_unit_and_pythagorean() {
        assert_eq!(l2_normalize(&[1.0, 0.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        let v = l2_normalize(&[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(v[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.8, epsilon = 1e-15);
        assert!(matches!(l2_normalize(&[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn constant_targets_give_flat_model() {
        let features: Vec<Vec<f64>> = (0..8)
            .map(|i| l2_normalize(&[1.0, i as f64 + 1.0]).unwrap())
            .collect();
        let targets = vec![3.5; 8];
        let outcome = train_nu_svr(&features, &targets, &SvrConfig::default()).unwrap();
        for w in &outcome.model.weights {
            assert_abs_diff_eq!(*w, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(outcome.model.bias, 3.5, epsilon = 1e-9);
        for x in &features {
            assert_abs_diff_eq!(outcome.model.predict_pre_normalized(x).unwrap(), 3.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn noiseless_line_is_recovered_within_tube() {
        // y = 2 * x on 8 points; with a large C the optimum interpolates.
        let raw: Vec<f64> = (0..8).map(|i| -0.7 + 0.2 * i as f64).collect();
        let features: Vec<Vec<f64>> = raw.iter().map(|&x| vec![x]).collect();
        let targets: Vec<f64> = raw.iter().map(|&x| 2.0 * x).collect();
        let config = SvrConfig {
            c: 100.0,
            tolerance: 1e-8,
            ..SvrConfig::default()
        };
        let outcome = train_nu_svr(&features, &targets, &config).unwrap();
        for (x, y) in features.iter().zip(&targets) {
            let pred = outcome.model.predict_pre_normalized(x).unwrap();
            assert!(
                (pred - y).abs() <= outcome.epsilon + 1e-3,
                "prediction {pred} vs target {y}, eps {}",
                outcome.epsilon
            );
        }
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let features = vec![vec![1.0, 2.0], vec![1.0, 2.0, 3.0]];
        let targets = vec![0.0, 1.0];
        assert!(matches!(
            train_nu_svr(&features, &targets, &SvrConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let features: Vec<Vec<f64>> = (0..12)
            .map(|i| l2_normalize(&[1.0, (i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).unwrap())
            .collect();
        let targets: Vec<f64> = (0..12).map(|i| (i as f64 * 0.73).sin()).collect();
        let a = train_nu_svr(&features, &targets, &SvrConfig::default()).unwrap();
        let b = train_nu_svr(&features, &targets, &SvrConfig::default()).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.support_coefficients, b.support_coefficients);
    }

    #[test]
    fn predict_matches_hand_example() {
        let model = DifficultyModel {
            weights: vec![1.0, 0.0],
            bias: 0.0,
            nu: 0.5,
            c: 1.0,
            normalized_inputs: true,
        };
        // normalize((3, 4)) = (0.6, 0.8), dot with (1, 0) = 0.6
        assert_abs_diff_eq!(model.predict(&[3.0, 4.0]).unwrap(), 0.6, epsilon = 1e-15);

        let flat = DifficultyModel {
            weights: vec![0.0, 0.0],
            bias: 0.5,
            nu: 0.5,
            c: 1.0,
            normalized_inputs: true,
        };
        assert_eq!(flat.predict(&[10.0, -3.0]).unwrap(), 0.5);

        assert!(model.predict(&[1.0, 2.0, 3.0]).is_err());
        assert!(model.predict(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn prediction_invariant_to_positive_rescaling() {
        let model = DifficultyModel {
            weights: vec![0.4, -1.3, 0.2],
            bias: 0.1,
            nu: 0.5,
            c: 1.0,
            normalized_inputs: true,
        };
        let v = [0.3, -2.0, 1.1];
        let scaled: Vec<f64> = v.iter().map(|x| x * 37.5).collect();
        assert_abs_diff_eq!(
            model.predict(&v).unwrap(),
            model.predict(&scaled).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn model_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = DifficultyModel {
            weights: vec![0.25, -0.5],
            bias: 1.5,
            nu: 0.5,
            c: 1.0,
            normalized_inputs: true,
        };
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.trim(),
            r#"{"w":[0.25,-0.5],"b":1.5,"nu":0.5,"c":1.0,"dim":2,"normalized_inputs":true}"#
        );
        assert_eq!(load_model(&path).unwrap(), model);
    }

    #[test]
    fn evaluate_predictor_recovers_perfect_and_inverted_rankings() {
        let model = DifficultyModel {
            weights: vec![0.0, 1.0],
            bias: 0.0,
            nu: 0.5,
            c: 1.0,
            normalized_inputs: false,
        };
        let features: Vec<FeatureRecord> = (0..5)
            .map(|i| FeatureRecord {
                image_id: format!("img{i}"),
                vector: vec![1.0, i as f64],
            })
            .collect();
        let increasing: Vec<DifficultyScore> = (0..5)
            .map(|i| DifficultyScore {
                image_id: format!("img{i}"),
                score: 10.0 + i as f64,
            })
            .collect();
        assert_eq!(evaluate_predictor(&model, &features, &increasing).unwrap(), 1.0);

        let decreasing: Vec<DifficultyScore> = increasing
            .iter()
            .map(|s| DifficultyScore {
                image_id: s.image_id.clone(),
                score: -s.score,
            })
            .collect();
        assert_eq!(evaluate_predictor(&model, &features, &decreasing).unwrap(), -1.0);

        let missing = &increasing[..4];
        assert!(matches!(
            evaluate_predictor(&model, &features, missing),
            Err(Error::MissingScore { .. })
        ));
    }
}
