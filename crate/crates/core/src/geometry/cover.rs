use std::ops::Bound;

use num::Signed;
use serde::{Deserialize, Serialize};

use super::{covers, int, rat, worldline_intersections, Diamond, GeometryError, SpacelikeInterval, Span, Worldline};

const MAX_STEPS: usize = 100_000;

/// Outcome of the three checks on a covering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverValidation {
    pub coverage: bool,
    pub avoidance: bool,
    pub chaining: bool,
}

impl CoverValidation {
    pub fn ok(&self) -> bool {
        self.coverage && self.avoidance && self.chaining
    }
}

fn zone_span(gamma: &Worldline, zone: &Diamond) -> Option<Span> {
    gamma.span_where(&zone.closure().constraints())
}

/// Finitely many spacelike intervals whose future developments cover `gamma ∩ closure(zone)`,
/// each avoiding `delta`, chained along `gamma`.
pub fn cover_segment(gamma: &Worldline, delta: &Worldline, zone: &Diamond) -> Result<Vec<SpacelikeInterval>, GeometryError> {
    let closed = zone.closure();
    let meet = match worldline_intersections(gamma, delta) {
        Ok(points) => points.into_iter().find(|p| closed.contains(p)),
        Err(GeometryError::DegenerateOverlap(p)) => Some(p),
        Err(e) => return Err(e),
    };
    if let Some(p) = meet {
        return Err(GeometryError::PreconditionViolated(format!("the curves meet at {p}, inside the zone")));
    }
    let Some(target) = zone_span(gamma, zone) else { return Ok(Vec::new()) };
    let (Some(t_in), Some(t_out)) = (target.lo_value().cloned(), target.hi_value().cloned()) else {
        unreachable!("a diamond is bounded")
    };

    // Large enough that a development from any point of the zone reaches past its top.
    let cap = (&zone.top.t - &zone.bottom.t) * int(2) + int(1);
    let mut out = Vec::new();
    let mut t = t_in;
    for _ in 0..MAX_STEPS {
        let p = gamma.point_at(&t);
        let dist = (delta.x_at(&t) - &p.x).abs();
        let r = (dist * rat(3, 4)).min(cap.clone());
        let iv = SpacelikeInterval::new(t.clone(), &p.x - &r, &p.x + &r)?;
        let reach = gamma.span_where(&iv.future_development()).expect("the development contains its own base point");
        out.push(iv);
        match reach.hi {
            Bound::Unbounded => return Ok(out),
            Bound::Excluded(e) | Bound::Included(e) => {
                if e > t_out {
                    return Ok(out);
                }
                t = (&t + &e) / int(2);
            }
        }
    }
    Err(GeometryError::StepLimit(MAX_STEPS))
}

/// Check coverage, avoidance of `delta`, and the chaining property.
pub fn validate_cover(gamma: &Worldline, delta: &Worldline, zone: &Diamond, intervals: &[SpacelikeInterval]) -> CoverValidation {
    let coverage = match zone_span(gamma, zone) {
        None => true,
        Some(target) => {
            let parts: Vec<Span> = intervals.iter().flat_map(|iv| gamma.spans_where(&iv.future_development())).collect();
            covers(&target, &parts)
        }
    };
    let avoidance = intervals.iter().all(|iv| !delta.meets(&iv.future_development()));
    let chaining = intervals.windows(2).all(|w| {
        let p = gamma.point_at(&w[1].t);
        !w[1].contains(&p) || w[0].future_development_contains(&p)
    });
    CoverValidation { coverage, avoidance, chaining }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Worldline};

    #[test]
    fn wide_gap_needs_one_interval() {
        let gamma = Worldline::stationary(int(0));
        let delta = Worldline::stationary(int(10));
        let zone = Diamond::closed(Point::ints(-1, 0), Point::ints(5, 0)).unwrap();
        let ivs = cover_segment(&gamma, &delta, &zone).unwrap();
        assert_eq!(ivs.len(), 1);
        assert!(validate_cover(&gamma, &delta, &zone, &ivs).ok());
    }

    #[test]
    fn narrow_gap_needs_several() {
        let gamma = Worldline::stationary(int(0));
        let delta = Worldline::stationary(int(2));
        let zone = Diamond::closed(Point::ints(0, 0), Point::ints(4, 0)).unwrap();
        let ivs = cover_segment(&gamma, &delta, &zone).unwrap();
        assert!(ivs.len() >= 2);
        assert!(ivs.iter().all(|iv| iv.width() < int(4) && iv.x_hi < int(2)));
        assert!(validate_cover(&gamma, &delta, &zone, &ivs).ok());
    }

    #[test]
    fn crossing_inside_zone_rejected() {
        let gamma = Worldline::stationary(int(0));
        let delta = Worldline::line(Point::ints(2, 0), int(1)).unwrap();
        let zone = Diamond::closed(Point::ints(0, 0), Point::ints(4, 0)).unwrap();
        assert!(matches!(cover_segment(&gamma, &delta, &zone), Err(GeometryError::PreconditionViolated(_))));
    }

    #[test]
    fn validator_rejects_a_short_cover() {
        let gamma = Worldline::stationary(int(0));
        let delta = Worldline::stationary(int(10));
        let zone = Diamond::closed(Point::ints(-1, 0), Point::ints(5, 0)).unwrap();
        // Apex exactly at the zone's top tip leaves that tip uncovered.
        let ivs = vec![SpacelikeInterval::new(int(-1), int(-6), int(6)).unwrap()];
        let v = validate_cover(&gamma, &delta, &zone, &ivs);
        assert!(!v.coverage && v.avoidance && v.chaining);
    }
}
