use gardenhose::groups::{
    act, builtin_w2, classify, extract_solution, generate_group, parse_cycles, standard_base, BasePair,
    Classification, ClassifyOptions, GroupSpec, Permutation, Witness,
};
use gardenhose::{entry_bit, verify_solution};
use proptest::prelude::*;

fn spec(degree: usize, gens: &[&str]) -> GroupSpec {
    GroupSpec::new(degree, gens.iter().map(|g| parse_cycles(g, degree).unwrap()).collect(), None).unwrap()
}

fn tetra_base() -> BasePair {
    BasePair::parse(4, "0-1,2-3", "1-4").unwrap()
}

/// Strict by brute force: the full orbit matrix is the identity.
fn brute_force_strict(elements: &[Permutation], base: &BasePair) -> bool {
    let pairs: Vec<_> = elements.iter().map(|g| act(g, base).unwrap()).collect();
    pairs.iter().enumerate().all(|(i, (a, _))| {
        pairs.iter().enumerate().all(|(j, (_, b))| entry_bit(a, b).unwrap() == u8::from(i == j))
    })
}

#[test]
fn left_invariance_over_s4_squared() {
    let base = tetra_base();
    let s4: Vec<Permutation> = generate_group(&spec(4, &["(1,2,3,4)", "(1,2)"]), 100).unwrap().iter().collect();
    assert_eq!(s4.len(), 24);
    let mut checked = 0;
    for g in &s4 {
        for h in &s4 {
            let (a_g, _) = act(g, &base).unwrap();
            let (_, b_h) = act(h, &base).unwrap();
            let (_, b_reduced) = act(&g.inverse().compose(h), &base).unwrap();
            assert_eq!(entry_bit(&a_g, &b_h).unwrap(), entry_bit(&base.alice, &b_reduced).unwrap(), "{g} {h}");
            checked += 1;
        }
    }
    assert_eq!(checked, 576);
}

#[test]
fn tetrahedral_groups_are_weak_with_six() {
    for gens in [&["(1,2,3)", "(1,2)(3,4)"][..], &["(1,2,3,4)", "(1,2)"][..]] {
        let r = classify(&spec(4, gens), &tetra_base(), &ClassifyOptions::default()).unwrap();
        assert_eq!(r.classification, Classification::Weak);
        assert_eq!(r.solution_size, 6);
        let Witness::Solution(s) = r.witness else { panic!("no witness") };
        assert_eq!(verify_solution(&s), Ok(()));
    }
}

#[test]
fn w2_is_strict_and_its_witness_checks_entry_by_entry() {
    let w2 = builtin_w2();
    let base = standard_base(10, 2).unwrap();
    let r = classify(&w2, &base, &ClassifyOptions::default()).unwrap();
    assert_eq!(r.classification, Classification::Strict);
    assert_eq!(r.group_order, 81);
    assert!((r.implied_ratio.unwrap() - 10.0 / 81f64.log2()).abs() < 1e-12);
    let s = extract_solution(&w2, &base, &ClassifyOptions::default()).unwrap();
    assert_eq!(s.k(), 81);
    let mut entries = 0;
    for (i, (a, _)) in s.pairs.iter().enumerate() {
        for (j, (_, b)) in s.pairs.iter().enumerate() {
            assert_eq!(entry_bit(a, b).unwrap(), u8::from(i == j));
            entries += 1;
        }
    }
    assert_eq!(entries, 81 * 81);
    let elements: Vec<Permutation> = generate_group(&w2, 100).unwrap().iter().collect();
    assert!(brute_force_strict(&elements, &base));
}

#[test]
fn trivial_group_gives_the_base_pair() {
    let s = extract_solution(&spec(4, &[]), &tetra_base(), &ClassifyOptions::default()).unwrap();
    assert_eq!(s.k(), 1);
}

/// A few fixed families plus random two-generator groups.
fn sample_groups() -> Vec<(GroupSpec, BasePair)> {
    let mut out = vec![
        (spec(4, &["(1,2,3)", "(1,2)(3,4)"]), tetra_base()),
        (spec(4, &["(1,2,3,4)"]), tetra_base()),
        (spec(4, &["(1,2)"]), standard_base(4, 1).unwrap()),
        (builtin_w2(), standard_base(10, 2).unwrap()),
        (spec(6, &["(1,2,3)(4,5,6)", "(1,4)(2,5)(3,6)"]), standard_base(6, 1).unwrap()),
        (spec(6, &["(1,3,5)", "(2,4,6)"]), standard_base(6, 2).unwrap()),
        (spec(8, &["(1,2,3)", "(4,5,6)", "(1,4)(2,5)(3,6)(7,8)"]), standard_base(8, 3).unwrap()),
    ];
    let w2_on_9 = gardenhose::groups::wreath_generators(2).unwrap().extend_to(10).unwrap();
    out.push((w2_on_9, standard_base(10, 2).unwrap()));
    out
}

#[test]
fn reduced_verdict_matches_brute_force_on_fixed_groups() {
    let opts = ClassifyOptions::default();
    for (s, base) in sample_groups() {
        let elements: Vec<Permutation> = generate_group(&s, 2000).unwrap().iter().collect();
        let r = classify(&s, &base, &opts).unwrap();
        assert_eq!(r.classification == Classification::Strict, brute_force_strict(&elements, &base), "{s:?}");
        if let Witness::Solution(w) = &r.witness {
            assert_eq!(verify_solution(w), Ok(()));
        }
    }
}

fn random_perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((1..=n).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn reduced_verdict_matches_brute_force_on_random_groups(
        (m, t, g1, g2) in prop::sample::select(vec![(4usize, 1usize), (6, 1), (6, 2), (8, 2), (8, 3)])
            .prop_flat_map(|(m, t)| (Just(m), Just(t), random_perm(m), random_perm(m)))
    ) {
        let gens = vec![Permutation::from_images(&g1).unwrap(), Permutation::from_images(&g2).unwrap()];
        let s = GroupSpec::new(m, gens, None).unwrap();
        let Ok(group) = generate_group(&s, 2000) else { return Ok(()) };
        let elements: Vec<Permutation> = group.iter().collect();
        let base = standard_base(m, t).unwrap();
        let r = classify(&s, &base, &ClassifyOptions { weak_threshold: 2000, ..Default::default() }).unwrap();
        prop_assert_eq!(r.classification == Classification::Strict, brute_force_strict(&elements, &base));
        match &r.witness {
            Witness::Solution(w) => {
                prop_assert_eq!(verify_solution(w), Ok(()));
                prop_assert_eq!(w.k(), r.solution_size);
            }
            Witness::Violation(_) => prop_assert_eq!(r.classification, Classification::NotGH),
            Witness::ReducedCertificate { .. } => prop_assert!(false, "small groups carry a witness"),
        }
        if r.classification == Classification::Strict {
            prop_assert_eq!(r.solution_size, r.group_order);
        }
    }
}
