use std::ops::Bound;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{int, Constraint, GeometryError, Point, Rational, Span};

/// Piecewise-linear inextendible causal curve, parametrised by time.
///
/// Because every segment has `Δt > 0`, the curve is the graph of a function
/// `x(t)` defined for all `t`, with end rays of the declared velocities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Worldline {
    vertices: Vec<Point>,
    #[serde(with = "crate::serde_rational")]
    initial_velocity: Rational,
    #[serde(with = "crate::serde_rational")]
    final_velocity: Rational,
}

/// One linear piece `x(t) = anchor.x + velocity·(t − anchor.t)` over `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: Option<Rational>,
    pub hi: Option<Rational>,
    pub anchor: Point,
    pub velocity: Rational,
}

impl Piece {
    pub fn x_at(&self, t: &Rational) -> Rational {
        &self.anchor.x + &self.velocity * (t - &self.anchor.t)
    }

    pub fn span(&self) -> Span {
        Span {
            lo: self.lo.clone().map_or(Bound::Unbounded, Bound::Included),
            hi: self.hi.clone().map_or(Bound::Unbounded, Bound::Included),
        }
    }

    /// Times in this piece at which the curve satisfies all constraints.
    pub fn span_where(&self, cs: &[Constraint]) -> Span {
        let mut span = self.span();
        for c in cs {
            // ct·t + cx·(ax + v(t − at)) + c0
            let a = &c.ct + &c.cx * &self.velocity;
            let b = &c.cx * (&self.anchor.x - &self.velocity * &self.anchor.t) + &c.c0;
            span = span.intersect(&Span::linear(&a, &b, c.strict));
            if span.is_empty() {
                break;
            }
        }
        span
    }
}

fn check_velocity(v: &Rational) -> Result<(), GeometryError> {
    if v.abs() > Rational::one() {
        return Err(GeometryError::VelocityOutOfRange(v.clone()));
    }
    Ok(())
}

impl Worldline {
    pub fn new(vertices: Vec<Point>, initial_velocity: Rational, final_velocity: Rational) -> Result<Self, GeometryError> {
        if vertices.is_empty() {
            return Err(GeometryError::NoVertices);
        }
        for (i, w) in vertices.windows(2).enumerate() {
            let dt = &w[1].t - &w[0].t;
            if !dt.is_positive() || dt < (&w[1].x - &w[0].x).abs() {
                return Err(GeometryError::NonCausalSegment { first: i, second: i + 1 });
            }
        }
        check_velocity(&initial_velocity)?;
        check_velocity(&final_velocity)?;
        Ok(Self { vertices, initial_velocity, final_velocity })
    }

    /// The straight worldline through `p` with constant velocity.
    pub fn line(p: Point, velocity: Rational) -> Result<Self, GeometryError> {
        Self::new(vec![p], velocity.clone(), velocity)
    }

    /// A worldline at rest at position `x`.
    pub fn stationary(x: Rational) -> Self {
        Self { vertices: vec![Point::new(int(0), x)], initial_velocity: int(0), final_velocity: int(0) }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn initial_velocity(&self) -> &Rational {
        &self.initial_velocity
    }

    pub fn final_velocity(&self) -> &Rational {
        &self.final_velocity
    }

    pub fn pieces(&self) -> Vec<Piece> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(Piece {
            lo: None,
            hi: Some(self.vertices[0].t.clone()),
            anchor: self.vertices[0].clone(),
            velocity: self.initial_velocity.clone(),
        });
        for w in self.vertices.windows(2) {
            out.push(Piece {
                lo: Some(w[0].t.clone()),
                hi: Some(w[1].t.clone()),
                anchor: w[0].clone(),
                velocity: (&w[1].x - &w[0].x) / (&w[1].t - &w[0].t),
            });
        }
        out.push(Piece {
            lo: Some(self.vertices[n - 1].t.clone()),
            hi: None,
            anchor: self.vertices[n - 1].clone(),
            velocity: self.final_velocity.clone(),
        });
        out
    }

    fn piece_at(&self, t: &Rational) -> Piece {
        self.pieces().into_iter().find(|p| p.span().contains(t)).expect("pieces cover the time axis")
    }

    pub fn x_at(&self, t: &Rational) -> Rational {
        self.piece_at(t).x_at(t)
    }

    pub fn point_at(&self, t: &Rational) -> Point {
        Point::new(t.clone(), self.x_at(t))
    }

    /// Velocity of the piece starting at or containing `t` (right derivative).
    pub fn velocity_after(&self, t: &Rational) -> Rational {
        self.pieces().into_iter().filter(|p| p.span().contains(t)).last().expect("pieces cover the time axis").velocity
    }

    /// Time sets where the curve satisfies all constraints, one per piece (empties dropped).
    pub fn spans_where(&self, cs: &[Constraint]) -> Vec<Span> {
        self.pieces().iter().map(|p| p.span_where(cs)).filter(|s| !s.is_empty()).collect()
    }

    /// Hull of [`Self::spans_where`]; exact when the constrained set is causally convex.
    pub fn span_where(&self, cs: &[Constraint]) -> Option<Span> {
        self.spans_where(cs).into_iter().reduce(|a, b| a.hull(&b))
    }

    pub fn meets(&self, cs: &[Constraint]) -> bool {
        self.pieces().iter().any(|p| !p.span_where(cs).is_empty())
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point, fv: impl Fn(&Rational) -> Rational) -> Self {
        Self {
            vertices: self.vertices.iter().map(&f).collect(),
            initial_velocity: fv(&self.initial_velocity),
            final_velocity: fv(&self.final_velocity),
        }
    }

    pub fn mirrored(&self) -> Self {
        self.map_points(Point::mirrored, |v| -v.clone())
    }

    pub fn translated(&self, dt: &Rational, dx: &Rational) -> Self {
        self.map_points(|p| p.translated(dt, dx), Rational::clone)
    }
}

/// Exact crossings of two worldlines, sorted by time.
pub fn worldline_intersections(a: &Worldline, b: &Worldline) -> Result<Vec<Point>, GeometryError> {
    let mut times: Vec<Rational> = a.vertices.iter().chain(b.vertices.iter()).map(|p| p.t.clone()).collect();
    times.sort();
    times.dedup();
    let diff = |t: &Rational| a.x_at(t) - b.x_at(t);
    let mut roots: Vec<Rational> = Vec::new();

    // Bounded pieces between consecutive breakpoints.
    for w in times.windows(2) {
        let (d0, d1) = (diff(&w[0]), diff(&w[1]));
        if d0.is_zero() && d1.is_zero() {
            return Err(GeometryError::DegenerateOverlap(a.point_at(&w[0])));
        }
        if d0.is_zero() {
            roots.push(w[0].clone());
        } else if d1.is_zero() {
            roots.push(w[1].clone());
        } else if d0.is_positive() != d1.is_positive() {
            // linear interpolation root
            let t = &w[0] + (&w[1] - &w[0]) * (&d0 / (&d0 - &d1));
            roots.push(t);
        }
    }

    // End rays.
    let first = &times[0];
    let last = &times[times.len() - 1];
    let rays = [(first, &a.initial_velocity - &b.initial_velocity, false), (last, &a.final_velocity - &b.final_velocity, true)];
    for (t0, slope, forward) in rays {
        let d0 = diff(t0);
        if d0.is_zero() {
            if slope.is_zero() {
                return Err(GeometryError::DegenerateOverlap(a.point_at(t0)));
            }
            roots.push(t0.clone());
            continue;
        }
        if slope.is_zero() {
            continue;
        }
        let dt = -&d0 / &slope;
        if (forward && dt.is_positive()) || (!forward && dt.is_negative()) {
            roots.push(t0 + dt);
        }
    }

    roots.sort();
    roots.dedup();
    Ok(roots.into_iter().map(|t| a.point_at(&t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::rat;

    #[test]
    fn crossing_of_rest_and_light_line() {
        let a = Worldline::stationary(int(0));
        let b = Worldline::line(Point::ints(0, 0), int(1)).unwrap();
        assert_eq!(worldline_intersections(&a, &b).unwrap(), vec![Point::ints(0, 0)]);
    }

    #[test]
    fn parallel_lines_never_cross() {
        let a = Worldline::stationary(int(0));
        let b = Worldline::stationary(int(1));
        assert!(worldline_intersections(&a, &b).unwrap().is_empty());
    }

    #[test]
    fn zigzag_crosses_twice_in_order() {
        // x = 0 line against a zigzag from x=-1 to x=1 and back.
        let z = Worldline::new(vec![Point::ints(0, -1), Point::ints(2, 1), Point::ints(4, -1)], int(0), int(0)).unwrap();
        let pts = worldline_intersections(&z, &Worldline::stationary(int(0))).unwrap();
        assert_eq!(pts, vec![Point::ints(1, 0), Point::ints(3, 0)]);
    }

    #[test]
    fn shared_segment_is_degenerate() {
        let a = Worldline::stationary(int(0));
        let b = Worldline::new(vec![Point::ints(0, 0), Point::ints(1, 0)], int(1), int(-1)).unwrap();
        assert!(matches!(worldline_intersections(&a, &b), Err(GeometryError::DegenerateOverlap(_))));
    }

    #[test]
    fn non_causal_segment_names_vertices() {
        let err = Worldline::new(vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(2, 3)], int(0), int(0)).unwrap_err();
        assert_eq!(err, GeometryError::NonCausalSegment { first: 1, second: 2 });
    }

    #[test]
    fn ray_evaluation() {
        let w = Worldline::new(vec![Point::ints(0, 0)], rat(1, 2), rat(-1, 2)).unwrap();
        assert_eq!(w.x_at(&int(-2)), int(-1));
        assert_eq!(w.x_at(&int(2)), int(-1));
    }
}
