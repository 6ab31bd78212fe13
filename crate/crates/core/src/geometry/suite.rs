//! Randomised property checks over the geometry constructions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use crate::Tally;

use super::cauchy::{future_envelope, past_envelope};
use super::{
    cover_segment, in_causal_future, int, rat, sample, separating_cauchy_surface, validate_cover, CausalSet, CausalSetKind,
    Diamond, GeometryError, Point,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySuiteReport {
    pub convexity: Tally,
    pub cauchy_envelopes: Tally,
    pub covers: Tally,
}

impl GeometrySuiteReport {
    pub fn passed(&self) -> bool {
        self.convexity.passed() && self.cauchy_envelopes.passed() && self.covers.passed()
    }
}

const KINDS: [CausalSetKind; 3] = [CausalSetKind::MPlus, CausalSetKind::MMinus, CausalSetKind::CausalComplement];

fn random_member<R: Rng>(rng: &mut R, set: &CausalSet) -> Option<Point> {
    (0..200).map(|_| Point::new(sample::grid(rng, -8, 8, 8), sample::grid(rng, -8, 8, 8))).find(|p| set.contains(p))
}

/// Causal convexity of `M⁺_O`, `M⁻_O` and `O^⊥`: sampled points on random causal paths
/// between two members stay members.
pub fn convexity(trials: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally { trials, ..Tally::default() };
    for i in 0..trials {
        let closed = rng.gen_bool(0.5);
        let o = sample::diamond(&mut rng, 3, closed);
        let set = CausalSet::of_diamond(KINDS[i % KINDS.len()], &o);
        let Some(p) = random_member(&mut rng, &set) else { continue };
        let q = (0..200).map(|_| sample::causal_future_point(&mut rng, &p, 6)).find(|q| set.contains(q));
        let Some(q) = q else { continue };
        let corners = rng.gen_range(0..=4);
        let path = sample::causal_path(&mut rng, &p, &q, corners);
        for w in path.windows(2) {
            for _ in 0..4 {
                let lambda = rat(rng.gen_range(0..=16), 16);
                let pt = Point::new(&w[0].t + (&w[1].t - &w[0].t) * &lambda, &w[0].x + (&w[1].x - &w[0].x) * &lambda);
                tally.checks += 1;
                if !set.contains(&pt) {
                    tally.violations += 1;
                }
            }
        }
    }
    tally
}

/// Strict envelope inequalities `g_K < f < h_L` at every breakpoint and at `samples` abscissae.
pub fn cauchy_envelopes(instances: usize, samples: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally { trials: instances, ..Tally::default() };
    let mut done = 0;
    while done < instances {
        let k = sample::diamond(&mut rng, 4, true);
        let l = sample::diamond(&mut rng, 4, true);
        if in_causal_future(&l.bottom, &k.top) {
            continue;
        }
        done += 1;
        let graph = separating_cauchy_surface(&k, &l).expect("precondition checked above");
        let mut xs: Vec<_> = graph.breakpoints.iter().map(|p| p.x.clone()).collect();
        xs.extend((0..samples).map(|_| sample::grid(&mut rng, -20, 20, 16)));
        for x in xs {
            let f = graph.eval(&x);
            tally.checks += 1;
            if !(past_envelope(&k, &x) < f && f < future_envelope(&l, &x)) {
                tally.violations += 1;
            }
        }
        tally.checks += 1;
        if !graph.is_lipschitz() {
            tally.violations += 1;
        }
    }
    tally
}

/// Random covering instances checked with the three-part validator.
pub fn covers(instances: usize, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally { trials: instances, ..Tally::default() };
    let mut done = 0;
    while done < instances {
        let gamma = sample::worldline(&mut rng, &int(0), 3);
        let gap = sample::grid(&mut rng, 1, 6, 4);
        let delta = sample::worldline(&mut rng, &gap, 3);
        let centre = gamma.point_at(&sample::grid(&mut rng, -2, 4, 4));
        let r = rat(rng.gen_range(2..=16), 4);
        let zone = Diamond::centred(centre.t, centre.x, r, true).expect("positive radius");
        match cover_segment(&gamma, &delta, &zone) {
            Err(GeometryError::PreconditionViolated(_)) => continue,
            Err(_) => {
                done += 1;
                tally.checks += 1;
                tally.violations += 1;
            }
            Ok(ivs) => {
                done += 1;
                tally.checks += 1;
                if !validate_cover(&gamma, &delta, &zone, &ivs).ok() {
                    tally.violations += 1;
                }
            }
        }
    }
    tally
}

pub fn run(convexity_trials: usize, instances: usize, samples: usize, seed: u64) -> GeometrySuiteReport {
    GeometrySuiteReport {
        convexity: convexity(convexity_trials, seed),
        cauchy_envelopes: cauchy_envelopes(instances, samples, seed.wrapping_add(1)),
        covers: covers(instances, seed.wrapping_add(2)),
    }
}
