use std::ops::Bound;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    causally_disjoint, check_causal_order, covers, meets_future, meets_past, sample, Constraint, Diamond, Point, Span, Worldline,
};

/// A sampled point of `O_C` together with past and future halves of curves that both avoid the target set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaWitness {
    pub point: Point,
    pub past_curve: Worldline,
    pub future_curve: Worldline,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SorkinGeometryReport {
    pub ordered: bool,
    pub disjoint_ac: bool,
    pub b_meets_future_a: bool,
    pub b_meets_past_c: bool,
    pub sampled_points: usize,
    pub sampled_curves: usize,
    pub falsifications: usize,
    pub witness: Option<LemmaWitness>,
}

impl SorkinGeometryReport {
    /// The exact predicates a Sorkin protocol needs: causal order and spacelike outer regions.
    pub fn admissible(&self) -> bool {
        self.ordered && self.disjoint_ac
    }
}

/// Whether `curve` restricted to `window` stays inside `J⁺(Ā) ∪ J⁻(Ā) ∪ J⁺(B̄)`,
/// i.e. never enters `Ā^⊥ ∖ J⁺(B̄)`.
fn avoids_target(curve: &Worldline, window: &Span, a: &Diamond, b: &Diamond) -> bool {
    let cones =
        [Constraint::future_of(&a.bottom, false), Constraint::past_of(&a.top, false), Constraint::future_of(&b.bottom, false)];
    let parts: Vec<Span> = cones.iter().flat_map(|c| curve.spans_where(c)).collect();
    covers(window, &parts)
}

/// Exact Sorkin-configuration predicates plus a sampled falsification test of
/// `O_C ⊆ D(Ā^⊥ ∖ J⁺(B̄))`.
pub fn sorkin_geometry_check(o_a: &Diamond, o_b: &Diamond, o_c: &Diamond, samples: usize, seed: u64) -> SorkinGeometryReport {
    let (a, b) = (o_a.closure(), o_b.closure());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut falsifications = 0;
    let mut witness = None;
    for _ in 0..samples {
        let p = sample::point_in(&mut rng, &o_c.interior());
        let past = Span { lo: Bound::Unbounded, hi: Bound::Included(p.t.clone()) };
        let future = Span { lo: Bound::Included(p.t.clone()), hi: Bound::Unbounded };
        let mut escaping_past = None;
        let mut escaping_future = None;
        for _ in 0..samples {
            let curve = sample::curve_through(&mut rng, &p, 8);
            if escaping_past.is_none() && avoids_target(&curve, &past, &a, &b) {
                escaping_past = Some(curve.clone());
            }
            if escaping_future.is_none() && avoids_target(&curve, &future, &a, &b) {
                escaping_future = Some(curve);
            }
        }
        if let (Some(past_curve), Some(future_curve)) = (escaping_past, escaping_future) {
            falsifications += 1;
            witness.get_or_insert(LemmaWitness { point: p, past_curve, future_curve });
        }
    }
    SorkinGeometryReport {
        ordered: check_causal_order(&[o_a.clone(), o_b.clone(), o_c.clone()]),
        disjoint_ac: causally_disjoint(o_a, o_c),
        b_meets_future_a: meets_future(o_b, o_a),
        b_meets_past_c: meets_past(o_b, o_c),
        sampled_points: samples,
        sampled_curves: samples * samples,
        falsifications,
        witness,
    }
}
