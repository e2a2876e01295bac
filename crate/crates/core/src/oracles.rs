//! Brute-force reference implementations for the test suites. Each oracle
//! recomputes its answer from first principles — exhaustive enumeration,
//! literal definitions, O(n^2) pair scans — and shares nothing with the
//! production code paths it cross-checks except the plain data types.
//!
//! Compiled only under the `oracles` feature; not part of the library
//! surface.

use std::collections::BTreeSet;

use crate::eval::ApMode;
use crate::types::{BoundingBox, Dataset, Detection, GroundTruthObject};

fn naive_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let ix = f64::max(0.0, f64::min(a.x_max, b.x_max) - f64::max(a.x_min, b.x_min));
    let iy = f64::max(0.0, f64::min(a.y_max, b.y_max) - f64::max(a.y_min, b.y_min));
    let inter = ix * iy;
    let area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
    let area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
    if inter <= 0.0 {
        0.0
    } else {
        inter / (area_a + area_b - inter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NaiveVerdict {
    Tp,
    Fp,
    Ignored,
}

/// Verdicts for one image-class cell, found by enumerating every candidate
/// detection-to-ground-truth assignment and keeping the unique one that is
/// consistent with the greedy protocol (each detection, in decreasing
/// score order, takes the highest-IoU still-available ground truth when
/// that IoU beats the threshold).
fn enumerate_cell_verdicts(
    dets: &[&Detection],
    gts: &[&GroundTruthObject],
    iou_threshold: f64,
    exclude_difficult: bool,
) -> Vec<NaiveVerdict> {
    let d = dets.len();
    let g = gts.len();
    let choices = g + 1; // one per ground truth, plus "unassigned"
    let mut consistent: Option<Vec<NaiveVerdict>> = None;
    let total = (choices as u64).pow(d as u32);
    'candidates: for code in 0..total {
        let mut assignment = Vec::with_capacity(d);
        let mut rest = code;
        for _ in 0..d {
            let pick = (rest % choices as u64) as usize;
            rest /= choices as u64;
            assignment.push(if pick == g { None } else { Some(pick) });
        }

        // Replay the greedy protocol and require the candidate to match it
        // step by step.
        let mut consumed = vec![false; g];
        let mut verdicts = Vec::with_capacity(d);
        for (det_pos, det) in dets.iter().enumerate() {
            let mut best: Option<(usize, f64)> = None;
            for (gt_idx, gt) in gts.iter().enumerate() {
                let shields = gt.difficult && exclude_difficult;
                if consumed[gt_idx] && !shields {
                    continue;
                }
                let overlap = naive_iou(&det.bbox, &gt.bbox);
                if best.map_or(true, |(_, b)| overlap > b) {
                    best = Some((gt_idx, overlap));
                }
            }
            let expected = match best {
                Some((gt_idx, overlap)) if overlap > iou_threshold => Some(gt_idx),
                _ => None,
            };
            if assignment[det_pos] != expected {
                continue 'candidates;
            }
            match expected {
                Some(gt_idx) => {
                    if gts[gt_idx].difficult && exclude_difficult {
                        verdicts.push(NaiveVerdict::Ignored);
                    } else {
                        consumed[gt_idx] = true;
                        verdicts.push(NaiveVerdict::Tp);
                    }
                }
                None => verdicts.push(NaiveVerdict::Fp),
            }
        }
        assert!(
            consistent.is_none(),
            "greedy protocol must admit exactly one assignment"
        );
        consistent = Some(verdicts);
    }
    consistent.expect("greedy protocol admits one assignment")
}

/// Literal-definition AP: interpolated precision at each achieved recall
/// is found by an O(n^2) scan, and the area is accumulated one recall
/// increment at a time.
fn naive_ap(verdicts: &[NaiveVerdict], npos: usize, mode: ApMode) -> f64 {
    let counted: Vec<&NaiveVerdict> = verdicts
        .iter()
        .filter(|v| **v != NaiveVerdict::Ignored)
        .collect();
    let n = counted.len();
    if n == 0 || npos == 0 {
        return 0.0;
    }
    let mut precision = Vec::with_capacity(n);
    let mut recall = Vec::with_capacity(n);
    for k in 0..n {
        let tp = counted[..=k]
            .iter()
            .filter(|v| ***v == NaiveVerdict::Tp)
            .count();
        precision.push(tp as f64 / (k + 1) as f64);
        recall.push(tp as f64 / npos as f64);
    }
    let max_precision_at_recall_at_least = |r: f64| -> f64 {
        let mut best = 0.0f64;
        for k in 0..n {
            if recall[k] >= r && precision[k] > best {
                best = precision[k];
            }
        }
        best
    };
    match mode {
        ApMode::Continuous => {
            let mut ap = 0.0;
            let mut prev = 0.0;
            for k in 0..n {
                if recall[k] > prev {
                    ap += (recall[k] - prev) * max_precision_at_recall_at_least(recall[k]);
                    prev = recall[k];
                }
            }
            ap
        }
        ApMode::ElevenPoint => {
            let mut sum = 0.0;
            for level in 0..=10 {
                sum += max_precision_at_recall_at_least(level as f64 / 10.0);
            }
            sum / 11.0
        }
    }
}

/// Brute-force mAP over a dataset: per image-class cell, verdicts come
/// from exhaustive assignment enumeration; per class, AP comes from the
/// literal definition; mAP is the mean over evaluated classes.
pub fn naive_mean_average_precision(
    detections_by_image: &std::collections::BTreeMap<String, Vec<Detection>>,
    dataset: &Dataset,
    iou_threshold: f64,
    mode: ApMode,
    exclude_difficult: bool,
) -> f64 {
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

    let mut aps = Vec::new();
    for class in classes {
        let mut npos = 0usize;
        // (score, image_id, per-image input index, verdict)
        let mut ranked: Vec<(f64, &str, usize, NaiveVerdict)> = Vec::new();
        let mut any_dets = false;
        for img in dataset.images() {
            let gts: Vec<&GroundTruthObject> = img
                .objects
                .iter()
                .filter(|o| o.class_label == class)
                .collect();
            npos += gts
                .iter()
                .filter(|o| !(o.difficult && exclude_difficult))
                .count();
            let dets_all = detections_by_image
                .get(&img.image_id)
                .map(Vec::as_slice)
                .unwrap_or(&[]);
            let mut dets: Vec<(usize, &Detection)> = dets_all
                .iter()
                .enumerate()
                .filter(|(_, d)| d.class_label == class)
                .collect();
            if dets.is_empty() {
                continue;
            }
            any_dets = true;
            dets.sort_by(|a, b| {
                b.1.score
                    .partial_cmp(&a.1.score)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            let ordered: Vec<&Detection> = dets.iter().map(|(_, d)| *d).collect();
            let verdicts =
                enumerate_cell_verdicts(&ordered, &gts, iou_threshold, exclude_difficult);
            for ((input_idx, det), verdict) in dets.iter().zip(verdicts) {
                ranked.push((det.score, img.image_id.as_str(), *input_idx, verdict));
            }
        }
        if npos == 0 && !any_dets {
            continue;
        }
        ranked.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(b.1))
                .then(a.2.cmp(&b.2))
        });
        let verdicts: Vec<NaiveVerdict> = ranked.iter().map(|r| r.3).collect();
        aps.push(naive_ap(&verdicts, npos, mode));
    }
    if aps.is_empty() {
        0.0
    } else {
        aps.iter().sum::<f64>() / aps.len() as f64
    }
}

/// Tau-b by direct enumeration of all pairs. Returns `None` when the
/// coefficient is undefined (all x tied or all y tied).
pub fn naive_kendall_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut tied_x = 0i64;
    let mut tied_y = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                tied_x += 1;
            }
            if dy == 0.0 {
                tied_y += 1;
            }
            if dx == 0.0 || dy == 0.0 {
                continue;
            }
            if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let n0 = (n * (n - 1) / 2) as i64;
    let denom = ((n0 - tied_x) as f64) * ((n0 - tied_y) as f64);
    if denom == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / denom.sqrt())
}

/// Exact solution of the linear nu-SVR dual found by exhaustive KKT
/// activity-pattern enumeration, written against the beta-space program
///
/// ```text
/// maximize  y . beta - 1/2 beta' K beta
/// s.t.      sum(beta) = 0, |beta_i| <= C/n, ||beta||_1 <= C * nu
/// ```
///
/// whose optimal value equals the paired-multiplier dual's. Every
/// variable is assigned one of five states (at +bound, at -bound, zero,
/// free positive, free negative); each pattern yields a small linear
/// system whose solution is kept when it satisfies all KKT conditions.
/// Intended for n <= 8 or so.
#[derive(Debug, Clone)]
pub struct NuSvrOracleSolution {
    pub objective: f64,
    pub beta: Vec<f64>,
}

pub fn nu_svr_dual_oracle(
    features: &[Vec<f64>],
    targets: &[f64],
    nu: f64,
    c: f64,
) -> NuSvrOracleSolution {
    let n = features.len();
    assert!(n >= 2 && n <= 12, "oracle is exhaustive; keep n small");
    let bound = c / n as f64;
    let mass = c * nu;
    let kernel: Vec<Vec<f64>> = features
        .iter()
        .map(|a| {
            features
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    let objective = |beta: &[f64]| -> f64 {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += beta[i] * beta[j] * kernel[i][j];
            }
        }
        beta.iter().zip(targets).map(|(b, y)| b * y).sum::<f64>() - 0.5 * quad
    };

    const TOL: f64 = 1e-7;
    let mut best: Option<NuSvrOracleSolution> = None;

    // State codes: 0 = at +bound, 1 = at -bound, 2 = zero, 3 = free
    // positive, 4 = free negative. The mu = 0 pass uses only {0, 1, 3}
    // (free sign does not matter and zero is a free variable landing at 0).
    for l1_active in [false, true] {
        let states_per_var: u64 = if l1_active { 5 } else { 3 };
        let total = states_per_var.pow(n as u32);
        'patterns: for code in 0..total {
            let mut state = Vec::with_capacity(n);
            let mut rest = code;
            for _ in 0..n {
                state.push((rest % states_per_var) as usize);
                rest /= states_per_var;
            }
            // In the mu = 0 pass state 2 means "free"; in the mu > 0 pass
            // states 3/4 are free and 2 pins beta to zero.
            let is_free = |s: usize| if l1_active { s == 3 || s == 4 } else { s == 2 };
            let free: Vec<usize> = (0..n).filter(|&i| is_free(state[i])).collect();

            let fixed_beta = |i: usize| -> f64 {
                match state[i] {
                    0 => bound,
                    1 => -bound,
                    2 if l1_active => 0.0,
                    _ => 0.0,
                }
            };

            // Unknowns: free betas, lambda, and mu when the L1 constraint
            // is active.
            let m = free.len();
            let unknowns = m + 1 + usize::from(l1_active);
            let mut a = vec![vec![0.0; unknowns]; unknowns];
            let mut rhs = vec![0.0; unknowns];

            // Stationarity rows for free variables:
            // sum_j K_ij beta_j + lambda (+/- mu) = y_i
            for (row, &i) in free.iter().enumerate() {
                for (col, &j) in free.iter().enumerate() {
                    a[row][col] = kernel[i][j];
                }
                a[row][m] = 1.0;
                if l1_active {
                    a[row][m + 1] = if state[i] == 3 { 1.0 } else { -1.0 };
                }
                let mut constant = 0.0;
                for j in 0..n {
                    if !is_free(state[j]) {
                        constant += kernel[i][j] * fixed_beta(j);
                    }
                }
                rhs[row] = targets[i] - constant;
            }
            // Sum-to-zero row.
            for col in 0..m {
                a[m][col] = 1.0;
            }
            rhs[m] = -(0..n)
                .filter(|&j| !is_free(state[j]))
                .map(fixed_beta)
                .sum::<f64>();
            // L1 equality row: signed free betas make up the remaining mass.
            if l1_active {
                for (col, &i) in free.iter().enumerate() {
                    a[m + 1][col] = if state[i] == 3 { 1.0 } else { -1.0 };
                }
                let bound_mass: f64 = (0..n)
                    .filter(|&j| !is_free(state[j]))
                    .map(|j| fixed_beta(j).abs())
                    .sum();
                rhs[m + 1] = mass - bound_mass;
            }

            let Some(solution) = solve_dense(&mut a, &mut rhs) else {
                continue 'patterns;
            };
            let lambda = solution[m];
            let mu = if l1_active { solution[m + 1] } else { 0.0 };
            if mu < -TOL {
                continue 'patterns;
            }

            let mut beta = vec![0.0; n];
            for (col, &i) in free.iter().enumerate() {
                beta[i] = solution[col];
            }
            for j in 0..n {
                if !is_free(state[j]) {
                    beta[j] = fixed_beta(j);
                }
            }

            // Feasibility of the free variables.
            for &i in &free {
                if l1_active {
                    if state[i] == 3 && !(-TOL..=bound + TOL).contains(&beta[i]) {
                        continue 'patterns;
                    }
                    if state[i] == 4 && !(-bound - TOL..=TOL).contains(&beta[i]) {
                        continue 'patterns;
                    }
                } else if beta[i].abs() > bound + TOL {
                    continue 'patterns;
                }
            }
            let l1: f64 = beta.iter().map(|b| b.abs()).sum();
            if l1 > mass + TOL {
                continue 'patterns;
            }

            // KKT inequalities on the bound and zero states.
            let grad = |i: usize| -> f64 {
                let mut kb = 0.0;
                for j in 0..n {
                    kb += kernel[i][j] * beta[j];
                }
                targets[i] - kb
            };
            for i in 0..n {
                match state[i] {
                    0 if grad(i) < lambda + mu - TOL => continue 'patterns,
                    1 if grad(i) > lambda - mu + TOL => continue 'patterns,
                    2 if l1_active
                        && !(lambda - mu - TOL..=lambda + mu + TOL).contains(&grad(i)) =>
                    {
                        continue 'patterns
                    }
                    _ => {}
                }
            }

            let value = objective(&beta);
            if best.as_ref().map_or(true, |b| value > b.objective) {
                best = Some(NuSvrOracleSolution {
                    objective: value,
                    beta,
                });
            }
        }
    }
    best.expect("at least one KKT pattern must be consistent")
}

/// Gaussian elimination with partial pivoting; `None` for (near-)singular
/// systems, which correspond to degenerate activity patterns the caller
/// skips.
fn solve_dense(a: &mut [Vec<f64>], rhs: &mut [f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .partial_cmp(&a[r2][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if a[pivot_row][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = rhs[row];
        for col in (row + 1)..n {
            sum -= a[row][col] * x[col];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}
