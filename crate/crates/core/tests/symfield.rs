mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srlab::symfield::{lie_bracket, rat, PolyVectorField, Polynomial, Rational, WeightVector};

fn field(dim: usize) -> impl Strategy<Value = PolyVectorField> {
    any::<u64>().prop_map(move |s| common::random_field(&mut ChaCha8Rng::seed_from_u64(s), dim))
}

fn scalar() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=7).prop_map(|(p, q)| rat(p, q))
}

fn weights() -> impl Strategy<Value = WeightVector> {
    prop_oneof![Just(vec![1, 1, 2]), Just(vec![1, 1, 3]), Just(vec![1, 2, 3])]
        .prop_map(|w| WeightVector::new(w).unwrap())
}

/// Drops the terms of weighted degree below −1, so the field is privileged.
fn privileged(x: &PolyVectorField, w: &WeightVector) -> PolyVectorField {
    let ws = w.as_slice();
    let comps = x
        .components()
        .iter()
        .enumerate()
        .map(|(j, c)| c.partition(|m| m.weighted_degree(ws) - ws[j] as i64 >= -1).0)
        .collect::<Vec<Polynomial>>();
    PolyVectorField::new(comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry(x in field(3), y in field(3)) {
        prop_assert_eq!(lie_bracket(&x, &y).unwrap(), lie_bracket(&y, &x).unwrap().neg());
    }

    #[test]
    fn jacobi(x in field(3), y in field(3), z in field(3)) {
        let a = lie_bracket(&x, &lie_bracket(&y, &z).unwrap()).unwrap();
        let b = lie_bracket(&y, &lie_bracket(&z, &x).unwrap()).unwrap();
        let c = lie_bracket(&z, &lie_bracket(&x, &y).unwrap()).unwrap();
        prop_assert!(a.add(&b).unwrap().add(&c).unwrap().is_zero());
    }

    #[test]
    fn bilinearity(x in field(3), y in field(3), z in field(3), a in scalar(), b in scalar()) {
        let lhs = lie_bracket(&x.scale(&a).add(&y.scale(&b)).unwrap(), &z).unwrap();
        let rhs = lie_bracket(&x, &z).unwrap().scale(&a).add(&lie_bracket(&y, &z).unwrap().scale(&b)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn split_reassembles(x in field(3), w in weights()) {
        let x = privileged(&x, &w);
        let (h, r) = x.weighted_split(&w).unwrap();
        prop_assert_eq!(h.add(&r).unwrap(), x);
        prop_assert!(h.weighted_degrees(&w).iter().all(|&(_, d)| d == -1));
        prop_assert!(r.weighted_degrees(&w).iter().all(|&(_, d)| d >= 0));
    }

    #[test]
    fn homogeneous_part_scales_under_dilation(x in field(3), w in weights(), l in (1i64..=9, 1i64..=9)) {
        let (h, _) = privileged(&x, &w).weighted_split(&w).unwrap();
        let lambda = rat(l.0, l.1);
        prop_assert_eq!(h.pushforward_by_dilation(&w, &lambda).unwrap(), h.scale(&lambda));
    }

    #[test]
    fn bracket_lowers_weighted_degree_by_one(x in field(3), y in field(3), w in weights()) {
        // [deg −1, deg −1] has degree −2 or vanishes
        let (hx, _) = privileged(&x, &w).weighted_split(&w).unwrap();
        let (hy, _) = privileged(&y, &w).weighted_split(&w).unwrap();
        let b = lie_bracket(&hx, &hy).unwrap();
        prop_assert!(b.weighted_degrees(&w).iter().all(|&(_, d)| d == -2));
    }
}

#[test]
fn corpus_identities_are_exact() {
    let c = common::corpus();
    assert_eq!(c.len(), 200);
    assert!(c.iter().filter(|x| x.is_zero()).count() < 5);
    for i in 0..c.len() {
        let (x, y, z) = (&c[i], &c[(i + 1) % c.len()], &c[(i + 7) % c.len()]);
        assert_eq!(lie_bracket(x, y).unwrap(), lie_bracket(y, x).unwrap().neg());
        let jac = lie_bracket(x, &lie_bracket(y, z).unwrap())
            .unwrap()
            .add(&lie_bracket(y, &lie_bracket(z, x).unwrap()).unwrap())
            .unwrap()
            .add(&lie_bracket(z, &lie_bracket(x, y).unwrap()).unwrap())
            .unwrap();
        assert!(jac.is_zero(), "Jacobi fails at {i}");
    }
}

#[test]
fn float_evaluation_matches_exact() {
    let p = [rat(1, 3), rat(-2, 5), rat(7, 4)];
    let pf: Vec<f64> = [1.0 / 3.0, -0.4, 1.75].to_vec();
    for x in common::corpus().iter().take(50) {
        let exact = x.evaluate_exact(&p).unwrap();
        let float = x.evaluate(&pf).unwrap();
        for (a, b) in exact.iter().zip(&float) {
            let a: f64 = num_traits::ToPrimitive::to_f64(a).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
