//! Structural properties of the open invariants: axioms, agreement between
//! the recursions, cache determinism and the sign transformations.

use std::sync::Arc;

use chiang_ogw::analysis::{self, boundary_table, interior_table};
use chiang_ogw::closed_gw::ClosedGw;
use chiang_ogw::open_gw::{degree_support, Constraints, OpenGw, OpenKey, Recursion};
use chiang_ogw::ExactRational;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn q(r: i64, s: i64) -> ExactRational {
    ExactRational::frac(r, s)
}

/// Every canonical key with `β ≤ beta_max`.
fn keys_up_to(beta_max: u32) -> Vec<OpenKey> {
    let mut out = Vec::new();
    for beta in 1..=beta_max {
        for l3 in 0..=beta / 2 {
            for l2 in 0..=beta - 2 * l3 {
                if let Some(key) = OpenKey::new(beta, beta - 2 * l3 - l2, l2, l3) {
                    out.push(key);
                }
            }
        }
    }
    out
}

fn constraints() -> impl Strategy<Value = Constraints> {
    (0..2u32, 0..3u32, 0..4u32, 0..3u32, 0..3u32)
        .prop_map(|(g0, g1, g2, g3, d)| Constraints::new(g0, g1, g2, g3, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unbalanced_degrees_vanish(beta in 1..=10u32, k in 0..6u32, raw in constraints()) {
        prop_assume!(degree_support(k, &raw) != beta as i64);
        let gw = OpenGw::default();
        prop_assert!(gw.evaluate(beta, k, raw).unwrap().is_zero());
    }

    #[test]
    fn wall_crossing_round_trip(beta in 1..=8u32, k in 0..4u32, raw in constraints()) {
        let gw = OpenGw::default();
        let with_diamond = Constraints { diamond: raw.diamond + 1, ..raw };
        prop_assert_eq!(
            gw.evaluate(beta, k + 1, raw).unwrap(),
            -gw.evaluate(beta, k, with_diamond).unwrap()
        );
    }

    #[test]
    fn divisor_is_linear(beta in 1..=8u32, k in 0..4u32, raw in constraints()) {
        prop_assume!(raw.g0 == 0);
        let gw = OpenGw::default();
        let with_line = Constraints { g1: raw.g1 + 1, ..raw };
        prop_assert_eq!(
            gw.evaluate(beta, k, with_line).unwrap(),
            q(beta as i64, 4) * gw.evaluate(beta, k, raw).unwrap()
        );
    }
}

#[test]
fn recursions_b_and_c_agree_where_both_apply() {
    let gw = OpenGw::default();
    let mut compared = 0;
    for key in keys_up_to(8) {
        if key.k >= 2 && key.l() >= 2 {
            let b = gw.evaluate_with(key, Recursion::B).unwrap();
            let c = gw.evaluate_with(key, Recursion::C).unwrap();
            assert_eq!(b, c, "{key}");
            compared += 1;
        }
    }
    assert!(compared > 10);
}

#[test]
fn recursion_a_agrees_with_dispatch_where_it_applies() {
    let gw = OpenGw::default();
    for key in keys_up_to(8) {
        if key.k >= 1 && key.l() >= 1 {
            let a = gw.evaluate_with(key, Recursion::A).unwrap();
            assert_eq!(a, gw.open_invariant(key).unwrap(), "{key}");
        }
    }
}

#[test]
fn cache_is_independent_of_evaluation_order() {
    let keys = keys_up_to(10);
    let top_down = OpenGw::default();
    for key in keys.iter().rev() {
        top_down.open_invariant(*key).unwrap();
    }
    let bottom_up = OpenGw::default();
    for key in &keys {
        bottom_up.open_invariant(*key).unwrap();
    }
    let reference = bottom_up.snapshot();
    assert_eq!(top_down.snapshot(), reference);

    let mut rng = StdRng::seed_from_u64(0x5eed);
    for _ in 0..3 {
        let mut shuffled = keys.clone();
        shuffled.shuffle(&mut rng);
        let gw = OpenGw::default();
        for key in &shuffled {
            gw.open_invariant(*key).unwrap();
        }
        assert_eq!(gw.snapshot(), reference);
    }

    let warm = OpenGw::default();
    warm.load(reference.clone());
    for key in &keys {
        assert_eq!(warm.open_invariant(*key).unwrap(), reference[key]);
    }
}

#[test]
fn sign_flips_are_commuting_involutions() {
    let gw = OpenGw::default();
    for table in [
        boundary_table(&gw, 12).unwrap(),
        interior_table(&gw, 8).unwrap(),
    ] {
        let o = analysis::orientation_flip(&table);
        let s = analysis::spin_flip(&table);
        assert_eq!(analysis::orientation_flip(&o).rows(), table.rows());
        assert_eq!(analysis::spin_flip(&s).rows(), table.rows());
        assert_eq!(
            analysis::spin_flip(&o).rows(),
            analysis::orientation_flip(&s).rows()
        );
    }
}

#[test]
fn pr_shift_is_additive_and_local() {
    let gw = OpenGw::default();
    let closed = ClosedGw::new();
    let table = interior_table(&gw, 8).unwrap();
    for p in [q(-1, 4), q(3, 7), q(0, 1)] {
        let shifted = analysis::pr_shift(&table, &p, &closed).unwrap();
        let back = analysis::pr_shift(&shifted, &-p.clone(), &closed).unwrap();
        assert_eq!(back.rows(), table.rows());
        for (a, b) in table.rows().iter().zip(shifted.rows()) {
            if a.beta % 4 != 0 {
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn tables_are_reproducible() {
    let a = interior_table(&OpenGw::default(), 8).unwrap().to_json();
    let b = interior_table(
        &OpenGw::new(Default::default(), Arc::new(ClosedGw::new())),
        8,
    )
    .unwrap()
    .to_json();
    assert_eq!(a, b);
}
