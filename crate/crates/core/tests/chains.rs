mod common;

use std::sync::Arc;

use common::*;
use dendrolab_core::chain::*;
use dendrolab_core::io;
use dendrolab_core::rational::{rat, Rational};
use dendrolab_core::wazewski::{gamma_chain, inverse_limit_stage, BondingFunction};
use dendrolab_core::{Dendrite, Order, Point, Subdendrite};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random nested sequence from a node to the whole tree, one random point at a time.
fn random_chain(rng: &mut ChaCha8Rng, w: &Arc<Dendrite>) -> Chain {
    let root = Point::Node(rng.gen_range(0..w.node_count()));
    let mut k = Subdendrite::singleton(w, root).unwrap();
    let mut elems = vec![k.clone()];
    for _ in 0..rng.gen_range(1..6) {
        let mut pts = k.extremes().to_vec();
        pts.push(random_point(rng, w));
        let next = Subdendrite::hull(w, &pts).unwrap();
        if next != k {
            elems.push(next.clone());
            k = next;
        }
    }
    let whole = Subdendrite::whole(w);
    if k != whole {
        elems.push(whole);
    }
    Chain::new(elems).unwrap()
}

fn pairs(list: &[(i64, i64, i64, i64)]) -> BondingFunction {
    BondingFunction::new(list.iter().map(|&(a, b, c, d)| (rat(a, b), rat(c, d))).collect()).unwrap()
}

fn gamma_grid(f: &BondingFunction) -> Vec<Rational> {
    let mut g: Vec<Rational> = (1..=16).map(|i| rat(i, 16)).collect();
    for (a, b) in f.pairs() {
        g.push(a.clone());
        g.push(b.clone());
    }
    g.extend(f.tip_hitting_times());
    g.sort();
    g.dedup();
    g
}

fn rational_closed_lists() -> Vec<Vec<(i64, i64, i64, i64)>> {
    vec![
        vec![(1, 4, 1, 2), (1, 2, 3, 4), (3, 4, 1, 1)],
        vec![(1, 8, 1, 4), (1, 4, 3, 8), (3, 8, 1, 2), (1, 2, 3, 4), (3, 4, 1, 1)],
        vec![(1, 3, 1, 2), (1, 2, 2, 3), (2, 3, 1, 1)],
        vec![(1, 8, 1, 4), (1, 4, 1, 2), (3, 8, 1, 2), (1, 2, 3, 4), (5, 8, 3, 4), (3, 4, 1, 1)],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn willful_modes_agree(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_tree(&mut rng, n);
        let c = random_chain(&mut rng, &w);
        let all = is_willful(&c, WillfulMode::AllArcs);
        prop_assert_eq!(all, is_willful(&c, WillfulMode::RootArcs));
        prop_assert_eq!(all, willful_violation_exhaustive(&c, WillfulMode::AllArcs).is_none());
    }

    #[test]
    fn hitting_times_are_monotone(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_tree(&mut rng, n);
        let c = random_chain(&mut rng, &w);
        let p = random_point(&mut rng, &w);
        let i = c.hitting_time(&p).unwrap();
        prop_assert!(c.elements()[i].contains(&p));
        prop_assert!(i == 0 || !c.elements()[i - 1].contains(&p));
        for q in c.hitting_level(&p).unwrap() {
            prop_assert_eq!(c.hitting_time(&q).unwrap(), i);
        }
    }

    #[test]
    fn chain_json_round_trip(seed in any::<u64>(), n in 2usize..11) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_tree(&mut rng, n);
        let c = random_chain(&mut rng, &w);
        let back = io::parse_chain(&io::chain_json(&c).to_string()).unwrap();
        prop_assert_eq!(back.elements().len(), c.elements().len());
        prop_assert_eq!(back.mesh(), c.mesh());
        for (a, b) in back.elements().iter().zip(c.elements()) {
            prop_assert_eq!(a.extremes(), b.extremes());
        }
        prop_assert_eq!(io::chain_json(&back), io::chain_json(&c));
    }
}

#[test]
fn generated_chains_meet_the_generic_conditions() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    for seed in 0..20 {
        let c = generate_generic_chain(&w, seed, &w.mesh()).unwrap();
        assert!(c.mesh() <= &w.mesh());
        let r = check_generic_conditions(&c, &w.mesh()).unwrap();
        assert!(r.passed(), "seed {seed}: {r:?}");
        assert!(is_willful(&c, WillfulMode::AllArcs));
        assert!(endpoint_of_hitting_time(&c).unwrap());
        let again = generate_generic_chain(&w, seed, &w.mesh()).unwrap();
        assert_eq!(io::chain_json(&again).to_string(), io::chain_json(&c).to_string());
    }
}

#[test]
fn coarse_resolution_needs_refinement() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let err = generate_generic_chain(&w, 0, &rat(1, 64)).unwrap_err();
    assert!(matches!(err, dendrolab_core::Error::RefineNeeded(_)), "{err}");
}

#[test]
fn gamma_chains_separate_the_classes() {
    for list in rational_closed_lists() {
        let f = pairs(&list);
        let c = gamma_chain(&f, 3, &gamma_grid(&f)).unwrap();
        let r = check_generic_conditions(&c, c.mesh()).unwrap();
        assert!(r.root_endpoint && r.nowhere_dense_steps && r.willful, "{list:?}: {r:?}");
        assert!(!r.branch_extremes && !r.branch_extreme_failures.is_empty(), "{list:?}");
        assert_eq!(r.first_failure(), Some("iii"));
    }
}

#[test]
fn gamma_chains_are_nested() {
    for list in rational_closed_lists() {
        let f = pairs(&list);
        let c = gamma_chain(&f, 3, &gamma_grid(&f)).unwrap();
        for (i, a) in c.elements().iter().enumerate() {
            for b in &c.elements()[i..] {
                assert!(a.is_subset(b));
            }
        }
        assert!(c.elements().last().unwrap().is_whole());
    }
}

#[test]
fn stage_two_for_one_pair() {
    let f = pairs(&[(1, 2, 3, 4)]);
    let w = inverse_limit_stage(&f, &rat(1, 1), 2).unwrap();
    // The diagonal [0,1] with the growth site at 1/2 and a branch up to 3/4.
    let expected = Dendrite::new(
        vec![Order::Finite(1), Order::Omega, Order::Finite(1), Order::Finite(1)],
        vec![(0, 1, rat(1, 2)), (1, 2, rat(1, 2)), (1, 3, rat(1, 4))],
        Some(2),
    )
    .unwrap();
    assert_eq!(w, expected);
    let one = inverse_limit_stage(&f, &rat(1, 1), 1).unwrap();
    assert_eq!(one.edges().len(), 2);
}
