//! Exact causal structure of 1+1 Minkowski spacetime with signature (-,+).
//!
//! All coordinates are arbitrary-precision rationals, so every predicate here
//! is decided exactly. Lightlike relations count as causal but not chronological.

mod cauchy;
mod cover;
mod route;
pub mod sample;
mod sorkin;
mod span;
pub mod suite;
mod transform;
mod worldline;

use std::fmt;

use num::{BigInt, BigRational, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cauchy::{future_envelope, past_envelope, separating_cauchy_surface, CauchyGraph};
pub use cover::{cover_segment, validate_cover, CoverValidation};
pub use route::{find_probe_route, ProbeRoute};
pub use sorkin::{sorkin_geometry_check, LemmaWitness, SorkinGeometryReport};
pub use span::{covers, Span};
pub use transform::Transform;
pub use worldline::{worldline_intersections, Piece, Worldline};

pub type Rational = BigRational;

/// `n/d` as a rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn to_f64(q: &Rational) -> f64 {
    use num::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("diamond tips are not chronologically related: bottom {bottom}, top {top}")]
    NotChronological { bottom: Point, top: Point },
    #[error("interval is empty: x_lo {lo} is not below x_hi {hi}")]
    EmptyInterval { lo: Rational, hi: Rational },
    #[error("worldline has no vertices")]
    NoVertices,
    #[error("worldline segment between vertices {first} and {second} is not future-directed causal")]
    NonCausalSegment { first: usize, second: usize },
    #[error("end-ray velocity {0} lies outside [-1, 1]")]
    VelocityOutOfRange(Rational),
    #[error("worldlines overlap along a segment starting at {0}")]
    DegenerateOverlap(Point),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("construction did not terminate within {0} steps")]
    StepLimit(usize),
}

/// An event `(t, x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    #[serde(with = "crate::serde_rational")]
    pub t: Rational,
    #[serde(with = "crate::serde_rational")]
    pub x: Rational,
}

impl Point {
    pub fn new(t: Rational, x: Rational) -> Self {
        Self { t, x }
    }

    pub fn ints(t: i64, x: i64) -> Self {
        Self::new(int(t), int(x))
    }

    /// Null coordinate `t + x`.
    pub fn u(&self) -> Rational {
        &self.t + &self.x
    }

    /// Null coordinate `t - x`.
    pub fn v(&self) -> Rational {
        &self.t - &self.x
    }

    pub fn from_null(u: &Rational, v: &Rational) -> Self {
        let two = int(2);
        Self::new((u + v) / &two, (u - v) / &two)
    }

    pub fn translated(&self, dt: &Rational, dx: &Rational) -> Self {
        Self::new(&self.t + dt, &self.x + dx)
    }

    pub fn mirrored(&self) -> Self {
        Self::new(self.t.clone(), -self.x.clone())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.t, self.x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalRelation {
    TimelikeFuture,
    LightlikeFuture,
    Spacelike,
    LightlikePast,
    TimelikePast,
    Equal,
}

impl CausalRelation {
    /// The relation seen from the other point.
    pub fn reversed(self) -> Self {
        use CausalRelation::*;
        match self {
            TimelikeFuture => TimelikePast,
            LightlikeFuture => LightlikePast,
            LightlikePast => LightlikeFuture,
            TimelikePast => TimelikeFuture,
            other => other,
        }
    }
}

/// How `q` sits relative to `p`.
pub fn causal_relation(p: &Point, q: &Point) -> CausalRelation {
    let dt = &q.t - &p.t;
    let dx = (&q.x - &p.x).abs();
    if dt.is_zero() && dx.is_zero() {
        return CausalRelation::Equal;
    }
    let adt = dt.abs();
    if adt < dx {
        CausalRelation::Spacelike
    } else if dt.is_positive() {
        if adt == dx {
            CausalRelation::LightlikeFuture
        } else {
            CausalRelation::TimelikeFuture
        }
    } else if adt == dx {
        CausalRelation::LightlikePast
    } else {
        CausalRelation::TimelikePast
    }
}

/// `q ∈ J⁺(p)`.
pub fn in_causal_future(p: &Point, q: &Point) -> bool {
    &q.t - &p.t >= (&q.x - &p.x).abs()
}

/// `q ∈ I⁺(p)`.
pub fn in_chronological_future(p: &Point, q: &Point) -> bool {
    &q.t - &p.t > (&q.x - &p.x).abs()
}

/// Half-plane `ct·t + cx·x + c0 > 0` (strict) or `≥ 0`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub ct: Rational,
    pub cx: Rational,
    pub c0: Rational,
    pub strict: bool,
}

impl Constraint {
    fn new(ct: i64, cx: i64, c0: Rational, strict: bool) -> Self {
        Self { ct: int(ct), cx: int(cx), c0, strict }
    }

    pub fn holds(&self, p: &Point) -> bool {
        let val = &self.ct * &p.t + &self.cx * &p.x + &self.c0;
        if self.strict {
            val.is_positive()
        } else {
            !val.is_negative()
        }
    }

    /// Points in `J⁺(p)` (or `I⁺(p)` when strict).
    pub fn future_of(p: &Point, strict: bool) -> [Constraint; 2] {
        // u ≥ u_p and v ≥ v_p
        [Self::new(1, 1, -p.u(), strict), Self::new(1, -1, -p.v(), strict)]
    }

    /// Points in `J⁻(p)` (or `I⁻(p)` when strict).
    pub fn past_of(p: &Point, strict: bool) -> [Constraint; 2] {
        [Self::new(-1, -1, p.u(), strict), Self::new(-1, 1, p.v(), strict)]
    }
}

pub fn all_hold(cs: &[Constraint], p: &Point) -> bool {
    cs.iter().all(|c| c.holds(p))
}

/// The double cone `I⁺(bottom) ∩ I⁻(top)`, or its closure.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diamond {
    pub bottom: Point,
    pub top: Point,
    pub closed: bool,
}

impl Diamond {
    pub fn new(bottom: Point, top: Point, closed: bool) -> Result<Self, GeometryError> {
        if !in_chronological_future(&bottom, &top) {
            return Err(GeometryError::NotChronological { bottom, top });
        }
        Ok(Self { bottom, top, closed })
    }

    pub fn open(bottom: Point, top: Point) -> Result<Self, GeometryError> {
        Self::new(bottom, top, false)
    }

    pub fn closed(bottom: Point, top: Point) -> Result<Self, GeometryError> {
        Self::new(bottom, top, true)
    }

    /// Diamond centred at `(t, x)` with spatial half-width `r`.
    pub fn centred(t: Rational, x: Rational, r: Rational, closed: bool) -> Result<Self, GeometryError> {
        let bottom = Point::new(&t - &r, x.clone());
        let top = Point::new(&t + &r, x);
        Self::new(bottom, top, closed)
    }

    pub fn closure(&self) -> Diamond {
        Diamond { closed: true, ..self.clone() }
    }

    pub fn interior(&self) -> Diamond {
        Diamond { closed: false, ..self.clone() }
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        let strict = !self.closed;
        let mut cs: Vec<Constraint> = Constraint::future_of(&self.bottom, strict).into();
        cs.extend(Constraint::past_of(&self.top, strict));
        cs
    }

    /// The two wedges making up the causal complement, as half-plane lists.
    pub fn complement_wedges(&self) -> [Vec<Constraint>; 2] {
        let strict = self.closed;
        let (p, q) = (&self.bottom, &self.top);
        let c = |ct: i64, cx: i64, c0: Rational| Constraint { ct: int(ct), cx: int(cx), c0, strict };
        [vec![c(-1, -1, p.u()), c(1, -1, -q.v())], vec![c(1, 1, -q.u()), c(-1, 1, p.v())]]
    }

    pub fn contains(&self, p: &Point) -> bool {
        all_hold(&self.constraints(), p)
    }

    /// Closed-diamond containment of another diamond's closure.
    pub fn contains_closure_of(&self, other: &Diamond) -> bool {
        self.contains(&other.bottom) && self.contains(&other.top)
    }

    pub fn centre(&self) -> Point {
        Point::from_null(&((self.bottom.u() + self.top.u()) / int(2)), &((self.bottom.v() + self.top.v()) / int(2)))
    }

    pub fn map(&self, f: impl Fn(&Point) -> Point) -> Diamond {
        Diamond { bottom: f(&self.bottom), top: f(&self.top), closed: self.closed }
    }

    /// Left and right corners `(t, x_left)`, `(t, x_right)` in null-coordinate terms.
    pub fn corners(&self) -> (Point, Point) {
        let left = Point::from_null(&self.bottom.u(), &self.top.v());
        let right = Point::from_null(&self.top.u(), &self.bottom.v());
        (left, right)
    }
}

/// Open segment `{t} × (x_lo, x_hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpacelikeInterval {
    #[serde(with = "crate::serde_rational")]
    pub t: Rational,
    #[serde(with = "crate::serde_rational")]
    pub x_lo: Rational,
    #[serde(with = "crate::serde_rational")]
    pub x_hi: Rational,
}

impl SpacelikeInterval {
    pub fn new(t: Rational, x_lo: Rational, x_hi: Rational) -> Result<Self, GeometryError> {
        if x_lo >= x_hi {
            return Err(GeometryError::EmptyInterval { lo: x_lo, hi: x_hi });
        }
        Ok(Self { t, x_lo, x_hi })
    }

    pub fn width(&self) -> Rational {
        &self.x_hi - &self.x_lo
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.t == self.t && p.x > self.x_lo && p.x < self.x_hi
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        vec![
            Constraint::new(1, 0, -self.t.clone(), false),
            Constraint::new(-1, 0, self.t.clone(), false),
            Constraint::new(0, 1, -self.x_lo.clone(), true),
            Constraint::new(0, -1, self.x_hi.clone(), true),
        ]
    }

    /// Future domain of dependence: the interval plus the open triangle above it.
    pub fn future_development(&self) -> Vec<Constraint> {
        vec![
            Constraint::new(1, 0, -self.t.clone(), false),
            // u < t + x_hi
            Constraint::new(-1, -1, &self.t + &self.x_hi, true),
            // v < t - x_lo
            Constraint::new(-1, 1, &self.t - &self.x_lo, true),
        ]
    }

    pub fn future_development_contains(&self, p: &Point) -> bool {
        all_hold(&self.future_development(), p)
    }
}

/// Domain of dependence of an open spacelike interval: the open diamond it spans.
pub fn domain_of_dependence(iv: &SpacelikeInterval) -> Diamond {
    let half = iv.width() / int(2);
    let mid = (&iv.x_lo + &iv.x_hi) / int(2);
    Diamond { bottom: Point::new(&iv.t - &half, mid.clone()), top: Point::new(&iv.t + &half, mid), closed: false }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalSetKind {
    JPlus,
    JMinus,
    MPlus,
    MMinus,
    CausalComplement,
    CausalHull,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalBase {
    Diamond(Diamond),
    Point(Point),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalSet {
    pub kind: CausalSetKind,
    pub base: CausalBase,
}

impl CausalSet {
    pub fn new(kind: CausalSetKind, base: CausalBase) -> Self {
        Self { kind, base }
    }

    pub fn of_diamond(kind: CausalSetKind, d: &Diamond) -> Self {
        Self::new(kind, CausalBase::Diamond(d.clone()))
    }

    fn in_future(&self, p: &Point) -> bool {
        match &self.base {
            CausalBase::Point(q) => in_causal_future(q, p),
            CausalBase::Diamond(d) if d.closed => in_causal_future(&d.bottom, p),
            CausalBase::Diamond(d) => in_chronological_future(&d.bottom, p),
        }
    }

    fn in_past(&self, p: &Point) -> bool {
        match &self.base {
            CausalBase::Point(q) => in_causal_future(p, q),
            CausalBase::Diamond(d) if d.closed => in_causal_future(p, &d.top),
            CausalBase::Diamond(d) => in_chronological_future(p, &d.top),
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match self.kind {
            CausalSetKind::JPlus => self.in_future(p),
            CausalSetKind::JMinus => self.in_past(p),
            CausalSetKind::MPlus => !self.in_past(p),
            CausalSetKind::MMinus => !self.in_future(p),
            CausalSetKind::CausalComplement => !self.in_future(p) && !self.in_past(p),
            CausalSetKind::CausalHull => self.in_future(p) && self.in_past(p),
        }
    }
}

pub fn set_contains(s: &CausalSet, p: &Point) -> bool {
    s.contains(p)
}

/// Every point of `ā` is spacelike to every point of `b̄`.
pub fn causally_disjoint(a: &Diamond, b: &Diamond) -> bool {
    !in_causal_future(&a.bottom, &b.top) && !in_causal_future(&b.bottom, &a.top)
}

/// `true` iff for all `i < j`, `closure(regions[j])` avoids `J⁻(closure(regions[i]))`.
pub fn check_causal_order(regions: &[Diamond]) -> bool {
    regions
        .iter()
        .enumerate()
        .all(|(i, earlier)| regions[i + 1..].iter().all(|later| !in_causal_future(&later.bottom, &earlier.top)))
}

/// `closure(b) ∩ J⁺(closure(a)) ≠ ∅`.
pub fn meets_future(b: &Diamond, a: &Diamond) -> bool {
    in_causal_future(&a.bottom, &b.top)
}

/// `closure(b) ∩ J⁻(closure(a)) ≠ ∅`.
pub fn meets_past(b: &Diamond, a: &Diamond) -> bool {
    in_causal_future(&b.bottom, &a.top)
}
