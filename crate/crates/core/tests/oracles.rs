mod common;

use common::{box_from_rationals, brute_force_ns_vertices, brute_success_probability, contracted_success, flatten, q};
use nlswap::boxes::{condition_on_alice, enumerate_ns_vertices, make_isotropic, BipartiteBox};
use nlswap::exact_scalar::rational;
use nlswap::functionals::{ch_value, coupler_valid_on, make_coupler};
use nlswap::linalg::convex_combination;
use nlswap::models::{classify, minimal_xb, noisy_local_bounds, noisy_local_family, perfect_xb, CouplerClass};
use nlswap::swap::{decompose_isotropic, swap, swap_threshold, IsotropicDecomposition};
use nlswap::wirings::enumerate_all_wirings;
use nlswap::{ExactScalar, Rational};
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-40i64..40, 1i64..12).prop_map(|(n, d)| rational(n, d))
}

fn arb_scalar() -> impl Strategy<Value = ExactScalar> {
    [arb_rational(), arb_rational(), arb_rational(), arb_rational()].prop_map(ExactScalar::from_coeffs)
}

fn arb_unit() -> impl Strategy<Value = ExactScalar> {
    (0i64..=24).prop_map(|n| q(n, 24))
}

/// Random non-signalling box: a convex mixture of three vertices.
fn arb_ns_box() -> impl Strategy<Value = BipartiteBox> {
    (prop::array::uniform3(0usize..24), prop::array::uniform3(1i64..10)).prop_map(|(picks, weights)| {
        let vertices = enumerate_ns_vertices();
        let total: i64 = weights.iter().sum();
        let mut out = BipartiteBox::zero();
        for (v, w) in picks.iter().zip(weights) {
            out = out.plus(&vertices[*v].scale(&q(w, total)));
        }
        out
    })
}

#[test]
fn vertex_list_matches_facet_enumeration() {
    let found: Vec<BipartiteBox> = brute_force_ns_vertices().iter().map(box_from_rationals).collect();
    let listed = enumerate_ns_vertices();
    assert_eq!(found.len(), 24);
    for v in &listed {
        assert!(found.contains(v), "missing vertex {v:?}");
    }
}

#[test]
fn every_vertex_is_extremal() {
    let vertices: Vec<Vec<ExactScalar>> = enumerate_ns_vertices().iter().map(flatten).collect();
    for (i, v) in vertices.iter().enumerate() {
        let others: Vec<Vec<ExactScalar>> =
            vertices.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| p.clone()).collect();
        assert!(convex_combination(&others, v).is_none(), "vertex {i} is a mixture");
    }
    let mixed = flatten(&BipartiteBox::maximally_mixed());
    assert!(convex_combination(&vertices, &mixed).is_some());
}

#[test]
fn noisy_local_bounds_match_products() {
    for xi in [q(1, 2), q(3, 4), q(9, 10), q(1, 1), q(1, 2) + ExactScalar::inv_sqrt2() * q(1, 2)] {
        let values: Vec<ExactScalar> = noisy_local_family(&xi).unwrap().iter().map(ch_value).collect();
        let (z_b, z_t) = noisy_local_bounds(&xi).unwrap();
        assert_eq!(values.iter().min().unwrap(), &z_b);
        assert_eq!(values.iter().max().unwrap(), &z_t);
    }
}

#[test]
fn threshold_inputs_swap_onto_local_bound() {
    let bq = ExactScalar::tsirelson_bound();
    let cases = [
        (q(3, 2), q(0, 1)),
        (q(3, 2), q(-1, 2)),
        (bq.clone(), perfect_xb(&bq).unwrap()),
        (q(3, 2), q(1, 4)),
    ];
    for (x_top, x_bottom) in cases {
        let coupler = make_coupler(&x_top, &x_bottom).unwrap();
        let v = swap_threshold(&coupler).unwrap();
        let xi = (&v + &q(1, 2)) * q(1, 2);
        if xi > ExactScalar::one() {
            continue;
        }
        let input = make_isotropic(&xi).unwrap();
        let outcome = swap(&coupler, &input, &input).unwrap();
        assert!(outcome.ch_success.is_one(), "threshold {v} for X_b = {x_bottom}");
    }
}

#[test]
fn wiring_enumeration_is_stable() {
    let first = enumerate_all_wirings().unwrap();
    let second = enumerate_all_wirings().unwrap();
    assert_eq!(first, second);
    assert_eq!(first.len(), 82);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
        prop_assert_eq!((&a + &b) + c.clone(), &a + &(&b + &c));
        prop_assert_eq!(&a * &(&b + &c), &a * &b + &a * &c);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a - &a, ExactScalar::zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inverse().unwrap()).is_one());
        }
    }

    #[test]
    fn sign_agrees_with_float_embedding(a in arb_scalar()) {
        let f = a.to_f64();
        if f.abs() > 1e-9 {
            prop_assert_eq!(a.signum() as f64, f.signum());
        }
        let (lo, hi) = a.enclosure(48);
        let (lo, hi) = (lo.to_f64().unwrap(), hi.to_f64().unwrap());
        prop_assert!(lo - 1e-9 <= f && f <= hi + 1e-9);
    }

    #[test]
    fn squares_have_exact_roots(a in arb_scalar()) {
        prop_assert_eq!((&a * &a).sqrt().unwrap(), a.abs());
    }

    #[test]
    fn text_round_trips(a in arb_scalar()) {
        prop_assert_eq!(ExactScalar::parse(&a.to_canonical_string()).unwrap(), a.clone());
        prop_assert_eq!(ExactScalar::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn functionals_are_linear(p in arb_ns_box(), r in arb_ns_box(), lambda in arb_unit(), x_b in arb_unit()) {
        let coupler = make_coupler(&q(3, 2), &(x_b - q(1, 2))).unwrap();
        let rest = ExactScalar::one() - &lambda;
        let mixed = p.scale(&lambda).plus(&r.scale(&rest));
        prop_assert_eq!(
            coupler.evaluate(&mixed),
            &lambda * &coupler.evaluate(&p) + &rest * &coupler.evaluate(&r)
        );
    }

    #[test]
    fn vertex_validity_extends_to_mixtures(p in arb_ns_box(), x_b in arb_unit()) {
        let x_b = x_b - q(1, 2);
        let coupler = make_coupler(&q(3, 2), &x_b).unwrap();
        if coupler_valid_on(&coupler, &enumerate_ns_vertices()) {
            prop_assert!(coupler_valid_on(&coupler, [&p]));
        }
    }

    #[test]
    fn isotropic_mixtures_round_trip(mu in arb_unit()) {
        let bx = IsotropicDecomposition { mu: mu.clone() }.reconstruct();
        prop_assert_eq!(decompose_isotropic(&bx).unwrap().mu, mu);
    }

    #[test]
    fn conditioning_recovers_bob_marginal(p in arb_ns_box(), x in 0u8..2) {
        let mut recombined = [ExactScalar::zero(), ExactScalar::zero(), ExactScalar::zero(), ExactScalar::zero()];
        for a in 0..2 {
            let weight = p.alice_prob(a, x, 0);
            if weight.is_zero() {
                continue;
            }
            let cond = condition_on_alice(&p, x, a).unwrap();
            for (slot, v) in recombined.iter_mut().zip(cond.entries()) {
                *slot += &weight * v;
            }
        }
        let marginal = p.bob_marginal();
        prop_assert_eq!(&recombined, marginal.entries());
    }

    #[test]
    fn wirings_match_their_strategies(p in arb_ns_box()) {
        for w in enumerate_all_wirings().unwrap() {
            prop_assert_eq!(w.strategy.simulate(&p), w.functional.evaluate(&p));
            prop_assert_eq!(w.strategy.kind(), w.kind);
        }
    }

    #[test]
    fn swap_matches_contraction(
        k in 1i64..=20,
        x_b in (0i64..40).prop_map(|n| q(n, 40) - q(1, 2)),
        mu in arb_unit(),
        nu in arb_unit(),
    ) {
        let x_top = q(1, 1) + q(k, 40);
        let coupler = make_coupler(&x_top, &x_b).unwrap();
        let ab = IsotropicDecomposition { mu }.reconstruct();
        let bc = IsotropicDecomposition { mu: nu }.reconstruct();
        let outcome = swap(&coupler, &ab, &bc).unwrap();
        let chi = coupler.functional();
        prop_assert_eq!(&outcome.p_success, &brute_success_probability(chi, &ab, &bc));
        let joint = contracted_success(chi, &ab, &bc);
        prop_assert_eq!(outcome.success_box.scale(&outcome.p_success), joint.clone());
        let fail = BipartiteBox::maximally_mixed().minus(&joint);
        prop_assert_eq!(outcome.failure_box.scale(&(ExactScalar::one() - &outcome.p_success)), fail);
    }

    #[test]
    fn success_probability_ignores_isotropic_weight(mu in arb_unit(), nu in arb_unit(), k in 1i64..=20) {
        let x_top = q(1, 1) + q(k, 40);
        let coupler = make_coupler(&x_top, &perfect_xb(&x_top).unwrap()).unwrap();
        let ab = IsotropicDecomposition { mu }.reconstruct();
        let bc = IsotropicDecomposition { mu: nu }.reconstruct();
        prop_assert_eq!(swap(&coupler, &ab, &bc).unwrap().p_success, q(1, 3));
    }

    #[test]
    fn classification_matches_genuine_swap(k in 1i64..=20, n in -20i64..20) {
        let x_top = q(1, 1) + q(k, 40);
        let x_bottom = q(n, 40);
        let coupler = make_coupler(&x_top, &x_bottom).unwrap();
        let genuine = make_isotropic(&((&x_top + &q(1, 2)) * q(1, 2))).unwrap();
        let ch = swap(&coupler, &genuine, &genuine).unwrap().ch_success;
        let class = classify(&x_top, &x_bottom).unwrap();
        let expected = if ch > x_top {
            CouplerClass::CreatesNonlocality
        } else if ch == x_top {
            CouplerClass::Perfect
        } else if ch.is_one() {
            CouplerClass::MinimalBoundary
        } else if ch < ExactScalar::one() {
            CouplerClass::NoSwapping
        } else {
            CouplerClass::Valid
        };
        prop_assert_eq!(class, expected);
        prop_assert!(minimal_xb(&x_top).unwrap() <= perfect_xb(&x_top).unwrap());
    }
}
