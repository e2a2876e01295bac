//! Property tests for the router: partition, rank invariance of the
//! difficulty split, and monotonicity in the requested fraction.

use detroute_core::{difficulty_split, random_split, DifficultyScore, Route};
use proptest::prelude::*;

fn scores_from(values: &[f64]) -> Vec<DifficultyScore> {
    values
        .iter()
        .enumerate()
        .map(|(i, &score)| DifficultyScore {
            image_id: format!("img{i:04}"),
            score,
        })
        .collect()
}

fn easy_set(assignment: &detroute_core::Assignment) -> Vec<String> {
    assignment
        .routes
        .iter()
        .filter(|(_, r)| **r == Route::Easy)
        .map(|(id, _)| id.clone())
        .collect()
}

proptest! {
    #[test]
    fn difficulty_split_partitions_the_dataset(
        values in proptest::collection::vec(-10.0..10.0f64, 1..40),
        fraction in 0.0..=1.0f64,
    ) {
        let scores = scores_from(&values);
        let assignment = difficulty_split(&scores, fraction).unwrap();
        prop_assert_eq!(assignment.len(), scores.len());
        for s in &scores {
            prop_assert!(assignment.route_for(&s.image_id).is_some());
        }
        let easy = assignment.easy_count();
        prop_assert_eq!(
            assignment.realized_fraction_easy,
            easy as f64 / scores.len() as f64
        );
    }

    #[test]
    fn difficulty_split_is_rank_invariant(
        values in proptest::collection::vec(-8.0..8.0f64, 1..30),
        fraction in 0.0..=1.0f64,
        ties in any::<bool>(),
    ) {
        // Quantizing to one decimal manufactures ties; the transform must
        // preserve them, so it is applied to the quantized values.
        let base: Vec<f64> = if ties {
            values.iter().map(|v| (v * 10.0).round() / 10.0).collect()
        } else {
            values.clone()
        };
        let scores = scores_from(&base);
        let reference = difficulty_split(&scores, fraction).unwrap();
        for transform in [|v: f64| v.exp(), |v: f64| 2.5 * v + 40.0, |v: f64| v.atan()] {
            let mapped: Vec<f64> = base.iter().map(|&v| transform(v)).collect();
            let assignment = difficulty_split(&scores_from(&mapped), fraction).unwrap();
            prop_assert_eq!(&assignment.routes, &reference.routes);
        }
    }

    #[test]
    fn increasing_the_fraction_never_demotes_an_image(
        values in proptest::collection::vec(-5.0..5.0f64, 1..30),
        f1 in 0.0..=1.0f64,
        f2 in 0.0..=1.0f64,
        ties in any::<bool>(),
    ) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let base: Vec<f64> = if ties {
            values.iter().map(|v| (v * 4.0).round() / 4.0).collect()
        } else {
            values
        };
        let scores = scores_from(&base);
        let small = difficulty_split(&scores, lo).unwrap();
        let large = difficulty_split(&scores, hi).unwrap();
        for id in easy_set(&small) {
            prop_assert_eq!(large.route_for(&id), Some(Route::Easy));
        }
    }

    #[test]
    fn random_split_counts_are_exact_for_every_seed(
        n in 1usize..120,
        fraction in 0.0..=1.0f64,
        seed in any::<u64>(),
    ) {
        let ids: Vec<String> = (0..n).map(|i| format!("img{i:04}")).collect();
        let assignment = random_split(&ids, fraction, seed).unwrap();
        prop_assert_eq!(assignment.len(), n);
        let expected = (fraction * n as f64).round() as usize;
        prop_assert_eq!(assignment.easy_count(), expected);
    }
}
