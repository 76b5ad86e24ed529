use gardenhose::groups::Permutation;
use gardenhose::{entry_bit, simulate_flow, Configuration, Side};
use proptest::prelude::*;

/// A random partial matching of `labels`, with the first label always
/// matched when `force_first` is set.
fn matching(labels: Vec<usize>, force_first: bool) -> impl Strategy<Value = Vec<(usize, usize)>> {
    let n = labels.len();
    (Just(labels).prop_shuffle(), 0..=n / 2).prop_map(move |(mut shuffled, count)| {
        if force_first {
            let pos = shuffled.iter().position(|&l| l == 0).unwrap();
            shuffled.swap(0, pos);
        }
        let count = if force_first { count.max(1) } else { count };
        shuffled.chunks(2).take(count).map(|c| (c[0], c[1])).collect()
    })
}

fn alice(m: usize) -> impl Strategy<Value = Configuration> {
    matching((0..=m).collect(), true).prop_map(move |h| Configuration::new(Side::Alice, m, &h).unwrap())
}

fn bob(m: usize) -> impl Strategy<Value = Configuration> {
    matching((1..=m).collect(), false).prop_map(move |h| Configuration::new(Side::Bob, m, &h).unwrap())
}

fn pair() -> impl Strategy<Value = (Configuration, Configuration)> {
    (1usize..=14).prop_flat_map(|m| (alice(m), bob(m)))
}

/// Adds hoses among the pipes left open by `c`, keeping `c`'s own hoses.
fn superset(c: &Configuration, extra: &[usize]) -> Configuration {
    let mut hoses = c.hoses();
    let mut open: Vec<usize> = Vec::new();
    for &p in extra {
        if p != 0 && c.is_open(p) && !open.contains(&p) {
            open.push(p);
        }
    }
    hoses.extend(open.chunks_exact(2).map(|w| (w[0], w[1])));
    Configuration::new(c.side(), c.pipes(), &hoses).unwrap()
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n);
            out.push(q);
        }
    }
    out
}

proptest! {
    #[test]
    fn water_always_leaves((a, b) in pair()) {
        let o = simulate_flow(&a, &b).unwrap();
        prop_assert!(o.path.len() <= a.pipes());
        let mut seen = o.path.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), o.path.len());
        prop_assert_eq!(*o.path.last().unwrap(), o.exit_pipe);
        match o.exit_side {
            Side::Alice => prop_assert!(a.is_open(o.exit_pipe)),
            Side::Bob => prop_assert!(b.is_open(o.exit_pipe)),
        }
    }

    #[test]
    fn bob_superset_keeps_alice_exit((a, b) in pair(), extra in proptest::collection::vec(1usize..=14, 0..14)) {
        let o = simulate_flow(&a, &b).unwrap();
        prop_assume!(o.bit() == 1);
        let extra: Vec<usize> = extra.into_iter().filter(|&p| p <= b.pipes()).collect();
        let bigger = superset(&b, &extra);
        prop_assert!(b.is_subset_of(&bigger));
        let o2 = simulate_flow(&a, &bigger).unwrap();
        prop_assert_eq!(o2.bit(), 1);
        prop_assert_eq!(o2.exit_pipe, o.exit_pipe);
    }

    #[test]
    fn alice_superset_keeps_bob_exit((a, b) in pair(), extra in proptest::collection::vec(1usize..=14, 0..14)) {
        let o = simulate_flow(&a, &b).unwrap();
        prop_assume!(o.bit() == 0);
        let extra: Vec<usize> = extra.into_iter().filter(|&p| p <= a.pipes()).collect();
        let bigger = superset(&a, &extra);
        prop_assert_eq!(bigger.partner(0), a.partner(0));
        let o2 = simulate_flow(&bigger, &b).unwrap();
        prop_assert_eq!(o2.bit(), 0);
        prop_assert_eq!(o2.exit_pipe, o.exit_pipe);
    }

    #[test]
    fn relabelling_every_pipe_commutes_with_flow((a, b) in (alice(4), bob(4))) {
        for images in all_perms(4) {
            let sigma = Permutation::from_images(&images).unwrap();
            let f = |p: usize| if p == 0 { 0 } else { sigma.apply(p) };
            let (a2, b2) = (a.relabel(f).unwrap(), b.relabel(f).unwrap());
            let (o, o2) = (simulate_flow(&a, &b).unwrap(), simulate_flow(&a2, &b2).unwrap());
            prop_assert_eq!(o.bit(), o2.bit());
            prop_assert_eq!(f(o.exit_pipe), o2.exit_pipe);
        }
    }

    #[test]
    fn relabelling_larger_instances((a, b) in (alice(10), bob(10)), images in Just((1..=10).collect::<Vec<usize>>()).prop_shuffle()) {
        let sigma = Permutation::from_images(&images).unwrap();
        let f = |p: usize| if p == 0 { 0 } else { sigma.apply(p) };
        prop_assert_eq!(
            entry_bit(&a, &b).unwrap(),
            entry_bit(&a.relabel(f).unwrap(), &b.relabel(f).unwrap()).unwrap()
        );
    }
}

#[test]
fn every_pair_of_every_m4_configuration_under_all_of_s4() {
    let m = 4;
    let alices: Vec<Configuration> =
        (1..=2).flat_map(|h| gardenhose::matrix::enumerate_alice(m, h).unwrap()).collect();
    let mut bobs = gardenhose::matrix::enumerate_bob(m, 1).unwrap();
    bobs.push(Configuration::empty(Side::Bob, m).unwrap());
    for h in [[(1, 2), (3, 4)], [(1, 3), (2, 4)], [(1, 4), (2, 3)]] {
        bobs.push(Configuration::new(Side::Bob, m, &h).unwrap());
    }
    for images in all_perms(4) {
        let sigma = Permutation::from_images(&images).unwrap();
        let f = |p: usize| if p == 0 { 0 } else { sigma.apply(p) };
        for a in &alices {
            for b in &bobs {
                let o = simulate_flow(a, b).unwrap();
                let o2 = simulate_flow(&a.relabel(f).unwrap(), &b.relabel(f).unwrap()).unwrap();
                assert_eq!((o.bit(), f(o.exit_pipe)), (o2.bit(), o2.exit_pipe), "{a} {b} {sigma}");
            }
        }
    }
}
