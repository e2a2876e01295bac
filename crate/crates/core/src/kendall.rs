//! Kendall's tau-b rank correlation with tie correction:
//! `tau = (C - D) / sqrt((n0 - t_x) * (n0 - t_y))` where `n0 = n(n-1)/2`,
//! `t_x`/`t_y` count pairs tied in x/y, and discordant pairs are counted
//! via merge-sort inversions.

use std::cmp::Ordering;

use crate::error::{Error, Result};

fn pairs_in_ties(run: usize) -> usize {
    run * (run - 1) / 2
}

/// Tau-b between two equal-length sequences of at least two finite values.
/// Sequences that are constant in x or in y leave the coefficient
/// undefined and are reported as an error.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateRanking(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateRanking("non-finite value".to_string()));
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    });

    // Joint ties and ties in x, counted over runs of the (x, y)-sorted list.
    let mut tied_x = 0usize;
    let mut tied_xy = 0usize;
    let mut run_x = 1usize;
    let mut run_xy = 1usize;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                tied_xy += pairs_in_ties(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += pairs_in_ties(run_x);
            run_x = 1;
            tied_xy += pairs_in_ties(run_xy);
            run_xy = 1;
        }
    }
    tied_x += pairs_in_ties(run_x);
    tied_xy += pairs_in_ties(run_xy);

    // Merge sort on y, counting swaps (discordant-ish exchanges).
    let mut swaps = 0usize;
    let mut buf = pairs.clone();
    let mut width = 1usize;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || pairs[i].1 <= pairs[j].1) {
                    buf[k] = pairs[i];
                    i += 1;
                } else {
                    buf[k] = pairs[j];
                    swaps += mid - i;
                    j += 1;
                }
                k += 1;
            }
            start = end;
        }
        std::mem::swap(&mut pairs, &mut buf);
        width *= 2;
    }

    // Ties in y, counted over the now y-sorted list.
    let mut tied_y = 0usize;
    let mut run_y = 1usize;
    for i in 1..n {
        if pairs[i].1 == pairs[i - 1].1 {
            run_y += 1;
        } else {
            tied_y += pairs_in_ties(run_y);
            run_y = 1;
        }
    }
    tied_y += pairs_in_ties(run_y);

    let n0 = n * (n - 1) / 2;
    let denom = ((n0 - tied_x) as f64) * ((n0 - tied_y) as f64);
    if denom == 0.0 {
        return Err(Error::DegenerateRanking(
            "all values tied in x or in y".to_string(),
        ));
    }
    // C - D = n0 - t_x - t_y + t_xy - 2 * swaps
    let concordant_minus_discordant =
        n0 as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    Ok((concordant_minus_discordant / denom.sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_rankings() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn reversed_rankings() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(kendall_tau(&x, &y).unwrap(), -1.0);
    }

    #[test]
    fn one_discordant_pair_out_of_six() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        assert_abs_diff_eq!(kendall_tau(&x, &y).unwrap(), 4.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn tie_corrected_value() {
        // scipy.stats.kendalltau([1,1,2,2,3,3], [1,2,2,3,3,4]) = 0.8006407690254357
        let x = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        let y = [1.0, 2.0, 2.0, 3.0, 3.0, 4.0];
        assert_abs_diff_eq!(
            kendall_tau(&x, &y).unwrap(),
            0.8006407690254358,
            epsilon = 1e-12
        );
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(kendall_tau(&[1.0], &[1.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0], &[1.0]).is_err());
        assert!(kendall_tau(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(kendall_tau(&[1.0, 2.0, 3.0], &[7.0, 7.0, 7.0]).is_err());
        assert!(kendall_tau(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
