use causal_core::geometry::{
    causal_relation, check_causal_order, cover_segment, domain_of_dependence, future_envelope, past_envelope, rat,
    separating_cauchy_surface, suite, validate_cover, Diamond, Point, Rational, SpacelikeInterval, Transform, Worldline,
};
use num::Signed;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..60, 1i64..7).prop_map(|(n, d)| rat(n, d))
}

fn point() -> impl Strategy<Value = Point> {
    (rational(), rational()).prop_map(|(t, x)| Point::new(t, x))
}

fn diamond() -> impl Strategy<Value = Diamond> {
    (point(), 1i64..24, 1i64..5, any::<bool>())
        .prop_map(|(c, n, d, closed)| Diamond::centred(c.t, c.x, rat(n, d), closed).unwrap())
}

/// Scale and boost from a small positive set, with a rational translation.
fn transform() -> impl Strategy<Value = Transform> {
    let factor = prop::sample::select(vec![rat(1, 3), rat(1, 2), rat(1, 1), rat(3, 2), rat(2, 1), rat(5, 1)]);
    (factor.clone(), factor, rational(), rational()).prop_map(|(scale, boost, shift_t, shift_x)| Transform {
        scale,
        boost,
        shift_t,
        shift_x,
    })
}

fn translation(dt: &Rational, dx: &Rational) -> Transform {
    Transform { shift_t: dt.clone(), shift_x: dx.clone(), ..Transform::identity() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn causal_relation_is_antisymmetric(p in point(), q in point()) {
        prop_assert_eq!(causal_relation(&q, &p), causal_relation(&p, &q).reversed());
    }

    #[test]
    fn causal_relation_is_translation_invariant(p in point(), q in point(), dt in rational(), dx in rational()) {
        let (p2, q2) = (p.translated(&dt, &dx), q.translated(&dt, &dx));
        prop_assert_eq!(causal_relation(&p2, &q2), causal_relation(&p, &q));
    }

    #[test]
    fn causal_relation_survives_causal_automorphisms(p in point(), q in point(), f in transform()) {
        prop_assert_eq!(causal_relation(&f.point(&p), &f.point(&q)), causal_relation(&p, &q));
    }

    #[test]
    fn domain_of_dependence_recovers_its_slice(t in rational(), lo in rational(), w in 1i64..40, xs in prop::collection::vec(rational(), 16)) {
        let iv = SpacelikeInterval::new(t.clone(), lo.clone(), &lo + rat(w, 3)).unwrap();
        let d = domain_of_dependence(&iv);
        let mut probes = xs;
        probes.extend([iv.x_lo.clone(), iv.x_hi.clone(), (&iv.x_lo + &iv.x_hi) / rat(2, 1)]);
        for x in probes {
            let p = Point::new(t.clone(), x);
            prop_assert_eq!(d.contains(&p), iv.contains(&p), "{}", p);
        }
    }

    #[test]
    fn causal_order_is_translation_invariant(regions in prop::collection::vec(diamond(), 1..4), dt in rational(), dx in rational()) {
        let shifted: Vec<Diamond> = regions.iter().map(|d| translation(&dt, &dx).diamond(d)).collect();
        prop_assert_eq!(check_causal_order(&shifted), check_causal_order(&regions));
    }

    #[test]
    fn causal_order_survives_causal_automorphisms(regions in prop::collection::vec(diamond(), 2..4), f in transform()) {
        let mapped: Vec<Diamond> = regions.iter().map(|d| f.diamond(d)).collect();
        prop_assert_eq!(check_causal_order(&mapped), check_causal_order(&regions));
    }

    #[test]
    fn separated_diamonds_get_a_strictly_separating_surface(k in diamond(), gap in 0i64..30, dx in rational(), r in 1i64..24, f in transform()) {
        // L's bottom tip lies in the chronological future of K's top tip, so K < L.
        let bottom = Point::new(&k.top.t + dx.abs() + rat(gap + 1, 4), &k.top.x + &dx);
        let top = Point::new(&bottom.t + rat(r, 2), bottom.x.clone());
        let l = Diamond::open(bottom, top).unwrap();
        prop_assert!(check_causal_order(&[k.clone(), l.clone()]));
        prop_assert!(check_causal_order(&[f.diamond(&k), f.diamond(&l)]));
        prop_assert!(!check_causal_order(&[l.clone(), k.clone()]));
        let g = separating_cauchy_surface(&k, &l).unwrap();
        prop_assert!(g.is_lipschitz());
        for x in (-200..=200).map(|i| &k.top.x + rat(i, 8)) {
            let f = g.eval(&x);
            let (above_k, below_l) = (past_envelope(&k, &x), future_envelope(&l, &x));
            prop_assert!(above_k < f && f < below_l, "x = {}", x);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regions_are_causally_convex(seed in any::<u64>()) {
        let t = suite::convexity(200, seed);
        prop_assert!(t.passed(), "{:?}", t);
        prop_assert!(t.checks > 0);
    }

    #[test]
    fn cauchy_surfaces_pass_the_envelope_test(seed in any::<u64>()) {
        let t = suite::cauchy_envelopes(5, 200, seed);
        prop_assert!(t.passed(), "{:?}", t);
    }

    #[test]
    fn covers_pass_their_validator(seed in any::<u64>()) {
        let t = suite::covers(5, seed);
        prop_assert!(t.passed(), "{:?}", t);
    }
}

#[test]
fn stacked_worldlines_have_a_valid_cover() {
    let gamma = Worldline::stationary(rat(-2, 1));
    let delta = Worldline::stationary(rat(3, 1));
    let zone = Diamond::closed(Point::new(rat(0, 1), rat(3, 1)), Point::new(rat(6, 1), rat(-2, 1))).unwrap();
    let cover = cover_segment(&gamma, &delta, &zone).unwrap();
    assert!(validate_cover(&gamma, &delta, &zone, &cover).ok());
}
