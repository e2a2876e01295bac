//! Kendall tau-b against the pair-enumeration oracle: all permutations up
//! to length 6, plus random tied sequences.

use detroute_core::kendall_tau;
use detroute_core::oracles::naive_kendall_tau;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for smaller in permutations(n - 1) {
        for slot in 0..n {
            let mut p = smaller.clone();
            p.insert(slot, n - 1);
            out.push(p);
        }
    }
    out
}

#[test]
fn matches_oracle_on_all_permutations_up_to_six() {
    for n in 2..=6 {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        for perm in permutations(n) {
            let y: Vec<f64> = perm.iter().map(|&v| v as f64).collect();
            let got = kendall_tau(&x, &y).unwrap();
            let expected = naive_kendall_tau(&x, &y).unwrap();
            assert_eq!(got, expected, "x={x:?} y={y:?}");
        }
    }
}

#[test]
fn matches_oracle_on_random_tied_sequences() {
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut compared = 0;
    for _ in 0..140 {
        let n = rng.gen_range(2..=8usize);
        // Values from a 4-symbol alphabet force plenty of ties.
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..4) as f64).collect();
        match naive_kendall_tau(&x, &y) {
            Some(expected) => {
                let got = kendall_tau(&x, &y).unwrap();
                assert_eq!(got, expected, "x={x:?} y={y:?}");
                compared += 1;
            }
            None => {
                assert!(kendall_tau(&x, &y).is_err(), "x={x:?} y={y:?}");
            }
        }
    }
    assert!(compared >= 100, "only {compared} defined cases");
}

#[test]
fn symmetry_and_monotone_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for _ in 0..60 {
        let n = rng.gen_range(3..=10usize);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
        let (Ok(xy), Ok(yx)) = (kendall_tau(&x, &y), kendall_tau(&y, &x)) else {
            continue;
        };
        assert_eq!(xy, yx);
        // Strictly increasing transforms preserve ranks exactly.
        let fy: Vec<f64> = y.iter().map(|v| 3.0 * v + 10.0).collect();
        assert_eq!(kendall_tau(&x, &fy).unwrap(), xy);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_eq!(kendall_tau(&x, &neg).unwrap(), -xy);
    }
}
