mod common;

use std::sync::Arc;
use std::time::Instant;

use common::*;
use dendrolab_core::backforth::*;
use dendrolab_core::chain::{generate_generic_chain, Chain};
use dendrolab_core::fullness::{is_nowhere_dense, perturb_to_full};
use dendrolab_core::rational::{half, rat};
use dendrolab_core::wazewski::{gamma_chain, BondingFunction};
use dendrolab_core::{Dendrite, Error, Order, Point, Subdendrite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A full, nowhere dense subcontinuum near a random one, if the perturbation
/// keeps it nowhere dense.
fn random_full(rng: &mut ChaCha8Rng, w: &Arc<Dendrite>) -> Option<Subdendrite> {
    let k = perturb_to_full(&random_arcish(rng, w, 4), &half(&w.mesh())).ok()?;
    is_nowhere_dense(&k, &w.mesh()).unwrap().then_some(k)
}

fn total_steps(w1: &Dendrite, w2: &Dendrite) -> usize {
    2 * w1.branching_nodes().len().max(w2.branching_nodes().len()) + 2
}

fn verified(iso: &PartialIso) {
    check_invariants(iso).unwrap();
    let report = extend_and_verify(iso).unwrap();
    assert!(report.zero_defect, "{report:?}");
}

#[test]
fn subcontinua_agree_with_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ambients = vec![wm(&[Order::Finite(3)], rat(1, 4), 2)];
    while ambients.len() < 12 {
        let n = rng.gen_range(4..12);
        let w = random_tree(&mut rng, n);
        if (1..=8).contains(&w.branching_nodes().len()) {
            ambients.push(w);
        }
    }
    let (mut tried, mut agreed) = (0, 0);
    for w in &ambients {
        for _ in 0..12 {
            let (Some(k1), Some(k2)) = (random_full(&mut rng, w), random_full(&mut rng, w)) else { continue };
            let ctx = Context::Subcontinua { k1: k1.clone(), k2: k2.clone() };
            let got = bf_subcontinua(&k1, &k2, total_steps(w, w));
            let expected = oracle_total(&ctx);
            tried += 1;
            match &got {
                Ok(iso) => verified(iso),
                Err(e) => assert!(matches!(e, Error::RefineNeeded(_)), "{e}"),
            }
            if got.is_ok() == expected {
                agreed += 1;
            }
        }
    }
    assert!(tried >= 50, "only {tried} instances");
    assert_eq!(agreed, tried);
}

#[test]
fn chains_agree_with_the_oracle() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let chains: Vec<Chain> = (0..12).map(|s| generate_generic_chain(&w, s, &w.mesh()).unwrap()).collect();
    for c1 in &chains[..6] {
        for c2 in &chains {
            let ctx = Context::Chains { c1: c1.clone(), c2: c2.clone() };
            let got = bf_chains(c1, c2, total_steps(&w, &w));
            assert_eq!(got.is_ok(), oracle_total(&ctx));
            if let Ok(iso) = got {
                verified(&iso);
                assert_eq!(iso.base(), Some((c1.root().node().unwrap(), c2.root().node().unwrap())));
            }
        }
    }
}

#[test]
fn identical_inputs_give_the_identity() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let c = generate_generic_chain(&w, 4, &w.mesh()).unwrap();
    let iso = bf_chains(&c, &c, total_steps(&w, &w)).unwrap();
    assert!(iso.pairs().iter().all(|(s, t)| s == t));
    assert_eq!(iso.len(), w.branching_nodes().len());
}

#[test]
fn depth_three_partial_maps_verify() {
    let w = w3_depth3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut returned = 0;
    let start = Instant::now();
    for _ in 0..10 {
        let (Some(k1), Some(k2)) = (random_full(&mut rng, &w), random_full(&mut rng, &w)) else { continue };
        let t = Instant::now();
        let r = bf_subcontinua(&k1, &k2, 12);
        assert!(t.elapsed().as_secs_f64() < 10.0);
        match r {
            Ok(iso) => {
                returned += 1;
                verified(&iso);
            }
            Err(e) => assert!(matches!(e, Error::RefineNeeded(_)), "{e}"),
        }
    }
    for seed in 0..4 {
        let c1 = generate_generic_chain(&w, seed, &w.mesh()).unwrap();
        let c2 = generate_generic_chain(&w, seed + 10, &w.mesh()).unwrap();
        match bf_chains(&c1, &c2, 12) {
            Ok(iso) => {
                returned += 1;
                verified(&iso);
            }
            Err(e) => assert!(matches!(e, Error::RefineNeeded(_)), "{e}"),
        }
    }
    assert!(returned > 0);
    assert!(start.elapsed().as_secs_f64() < 140.0);
}

#[test]
fn preconditions_are_reported() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let spine = Subdendrite::arc(&w, Point::Node(0), Point::Node(1)).unwrap();
    let whole = Subdendrite::whole(&w);
    let err = bf_subcontinua(&spine, &whole, 4).unwrap_err();
    assert!(matches!(&err, Error::Precondition { condition: Some(c), .. } if c == "full"), "{err}");
    let err = bf_subcontinua(&whole, &whole, 4).unwrap_err();
    assert!(matches!(&err, Error::Precondition { condition: Some(c), .. } if c == "nowhere-dense"), "{err}");
    let other = wm(&[Order::Finite(3)], rat(1, 4), 1);
    let err = bf_subcontinua(&whole, &Subdendrite::whole(&other), 4).unwrap_err();
    assert_eq!(err, Error::AmbientMismatch);
}

#[test]
fn omega_requires_omega_ambients() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let c = generate_generic_chain(&w, 0, &w.mesh()).unwrap();
    let err = bf_chains_omega(&c, &c, 4).unwrap_err();
    assert!(matches!(&err, Error::Precondition { condition: None, .. }), "{err}");
}

#[test]
fn omega_rejects_finite_gamma_chains() {
    let f = BondingFunction::new(vec![(rat(1, 4), rat(1, 2)), (rat(1, 2), rat(3, 4)), (rat(3, 4), rat(1, 1))]).unwrap();
    let mut grid: Vec<_> = (1..=16).map(|i| rat(i, 16)).collect();
    grid.extend(f.tip_hitting_times());
    grid.sort();
    grid.dedup();
    let c = gamma_chain(&f, 3, &grid).unwrap();
    let err = bf_chains_omega(&c, &c, 4).unwrap_err();
    assert!(matches!(&err, Error::Precondition { condition: Some(x), .. } if x == "iii"), "{err}");
}

/// Leaf `root` joined to an omega node `b` with two more leaves; unit edges.
fn omega_star(root: usize, b: usize, leaves: [usize; 2]) -> Chain {
    let mut orders = vec![Order::Finite(1); 4];
    orders[b] = Order::Omega;
    let edges = vec![(root, b, rat(1, 1)), (b, leaves[0], rat(1, 1)), (b, leaves[1], rat(1, 1))];
    let w = Arc::new(Dendrite::new(orders, edges, None).unwrap());
    let elems = vec![
        Subdendrite::singleton(&w, Point::Node(root)).unwrap(),
        Subdendrite::arc(&w, Point::Node(root), Point::Node(b)).unwrap(),
        Subdendrite::whole(&w),
    ];
    Chain::with_mesh(elems, rat(3, 2)).unwrap()
}

#[test]
fn omega_on_hand_built_chains() {
    let c1 = omega_star(0, 1, [2, 3]);
    let c2 = omega_star(3, 2, [0, 1]);
    let iso = bf_chains_omega(&c1, &c2, 4).unwrap();
    assert_eq!(iso.base(), Some((0, 3)));
    assert_eq!(iso.image(1), Some(2));
    verified(&iso);
}

#[test]
fn partial_maps_round_trip_through_pairs() {
    let w = wm(&[Order::Finite(3)], rat(1, 4), 2);
    let c = generate_generic_chain(&w, 2, &w.mesh()).unwrap();
    let iso = bf_chains(&c, &c, 6).unwrap();
    let ctx = Context::Chains { c1: c.clone(), c2: c.clone() };
    let again = PartialIso::from_pairs(ctx, iso.pairs().to_vec()).unwrap();
    check_invariants(&again).unwrap();
    assert_eq!(again.to_json(), iso.to_json());
}
