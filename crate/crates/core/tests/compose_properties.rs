use gardenhose::compose::{compose, wreath_family_bound, DEFAULT_COMPOSE_CAP};
use gardenhose::matrix::DEFAULT_MEMORY_BUDGET;
use gardenhose::search::{SearchParams, SearchSpace};
use gardenhose::{bound, entry_bit, verify_solution, PowerOf, Solution};
use proptest::prelude::*;

/// A verified solution from a short, fully step-budgeted search.
fn searched(m: usize, t: usize, seed: u64, keep: usize) -> Solution {
    let space = SearchSpace::new(m, t, DEFAULT_MEMORY_BUDGET).unwrap();
    let params = SearchParams {
        max_steps: Some(2_000),
        no_improve_timeout: None,
        max_wall_time: None,
        ..SearchParams::new(m, t, seed)
    };
    let mut s = space.search(&params, &|_| {}).unwrap().best;
    s.pairs.truncate(keep.max(1));
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn composed_entries_follow_index_equality(
        (m, t) in prop::sample::select(vec![(4usize, 1usize), (6, 1), (6, 2)]),
        seed in any::<u64>(),
        keep in 1usize..8,
        blocks in 1u32..=2,
    ) {
        let s = searched(m, t, seed, keep);
        prop_assert_eq!(verify_solution(&s), Ok(()));
        let c = compose(&s, blocks, DEFAULT_COMPOSE_CAP).unwrap();
        let k = s.k();
        prop_assert_eq!(c.k(), k.pow(blocks));
        prop_assert_eq!(c.m, m * blocks as usize);
        // Pair index i encodes the index vector in base k, block 0 most significant.
        let digits = |i: usize| -> Vec<usize> {
            (0..blocks).rev().map(|b| i / k.pow(b) % k).collect()
        };
        for (i, (a, _)) in c.pairs.iter().enumerate() {
            for (j, (_, b)) in c.pairs.iter().enumerate() {
                prop_assert_eq!(entry_bit(a, b).unwrap() == 1, digits(i) == digits(j));
            }
        }
    }

    #[test]
    fn ratio_is_invariant_under_powers(m in 2u64..64, k in 2u64..1000, t in 1u32..6) {
        let one = bound(m, PowerOf::value(k)).unwrap().ratio;
        let many = bound(m * t as u64, PowerOf { base: k, exp: t }).unwrap().ratio;
        prop_assert!((one - many).abs() < 1e-9);
    }
}

#[test]
fn wreath_family_ratios_fall_towards_the_limit() {
    let limit = 2.0 / 3f64.log2();
    let ratios: Vec<f64> = (2..=5).map(|l| wreath_family_bound(l).unwrap().ratio).collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0]);
    }
    for (l, r) in (2..=5).zip(&ratios) {
        let n = 3f64.powi(l);
        assert!((r - limit * (n + 1.0) / (n - 1.0)).abs() < 1e-9);
        assert!(*r > limit);
    }
    assert!((ratios[3] - limit) < 0.011);
}
