use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{in_chronological_future, int, rat, worldline_intersections, Constraint, Diamond, Point, Rational, Worldline};

/// A probe worldline crossing `gamma_C` at `entry` and later `gamma_A` at `exit`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeRoute {
    pub route: Worldline,
    pub entry: Point,
    pub exit: Point,
}

impl ProbeRoute {
    /// The closed diamond spanned by the two crossings; all crossings lie in it.
    pub fn zone(&self) -> Diamond {
        Diamond { bottom: self.entry.clone(), top: self.exit.clone(), closed: true }
    }
}

/// Open time window `(lo, hi)` during which `w` lies outside `J⁻(early_top)` and `J⁺(late_bottom)`.
fn window(w: &Worldline, early_top: &Point, late_bottom: &Point) -> (Option<Rational>, Option<Rational>) {
    let lo = w.span_where(&Constraint::past_of(early_top, false)).and_then(|s| s.hi_value().cloned());
    let hi = w.span_where(&Constraint::future_of(late_bottom, false)).and_then(|s| s.lo_value().cloned());
    (lo, hi)
}

fn finite(lo: Option<Rational>, hi: Option<Rational>, reach: &Rational) -> (Rational, Rational) {
    match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => {
            let h = &l + reach;
            (l, h)
        }
        (None, Some(h)) => (&h - reach, h),
        (None, None) => (-reach.clone(), reach.clone()),
    }
}

fn extent(points: &[&Point]) -> Rational {
    points.iter().map(|p| p.t.abs().max(p.x.abs())).max().unwrap_or_else(Rational::zero)
}

/// A route through `M⁺(O_A) ∩ M⁻(O_C)` meeting `gamma_c` first and `gamma_a` afterwards.
///
/// Returns `None` when no such causal route exists. The route's crossings with both
/// worldlines are guaranteed to lie in [`ProbeRoute::zone`].
pub fn find_probe_route(o_a: &Diamond, o_c: &Diamond, gamma_a: &Worldline, gamma_c: &Worldline) -> Option<ProbeRoute> {
    let mut pts: Vec<&Point> = vec![&o_a.bottom, &o_a.top, &o_c.bottom, &o_c.top];
    pts.extend(gamma_a.vertices());
    pts.extend(gamma_c.vertices());
    let reach = (extent(&pts) + int(1)) * int(8);

    let (c_lo, c_hi) = window(gamma_c, &o_a.top, &o_c.bottom);
    let (a_lo, a_hi) = window(gamma_a, &o_a.top, &o_c.bottom);
    let (c_lo, c_hi) = finite(c_lo, c_hi, &reach);
    let (a_lo, a_hi) = finite(a_lo, a_hi, &reach);
    if c_lo >= c_hi || a_lo >= a_hi {
        return None;
    }

    // The margin t_A − t_C − |x_A − x_C| grows as t_C decreases and t_A increases.
    let margin = |tc: &Rational, ta: &Rational| ta - tc - (gamma_a.x_at(ta) - gamma_c.x_at(tc)).abs();
    let best = margin(&c_lo, &a_hi);
    if !best.is_positive() {
        return None;
    }
    let delta = (best / int(8)).min((&c_hi - &c_lo) / int(2)).min((&a_hi - &a_lo) / int(2));
    let entry = gamma_c.point_at(&(&c_lo + &delta));
    let exit = gamma_a.point_at(&(&a_hi - &delta));
    if !in_chronological_future(&entry, &exit) {
        return None;
    }

    let segment_v = (&exit.x - &entry.x) / (&exit.t - &entry.t);
    let mut candidates = vec![segment_v, int(0), rat(1, 2), rat(-1, 2), int(1), int(-1), rat(1, 4), rat(-1, 4)];
    candidates.dedup();
    let zone = Diamond { bottom: entry.clone(), top: exit.clone(), closed: true };
    for vi in &candidates {
        for vf in &candidates {
            let Ok(route) = Worldline::new(vec![entry.clone(), exit.clone()], vi.clone(), vf.clone()) else {
                continue;
            };
            let inside = |w: &Worldline| match worldline_intersections(&route, w) {
                Ok(pts) => pts.iter().all(|p| zone.contains(p)),
                Err(_) => false,
            };
            if inside(gamma_a) && inside(gamma_c) {
                return Some(ProbeRoute { route, entry, exit });
            }
        }
    }
    None
}
