use std::cmp::Ordering;
use std::ops::Bound;

use num::{Signed, Zero};

use super::Rational;

/// A convex subset of the real line with exact rational ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub lo: Bound<Rational>,
    pub hi: Bound<Rational>,
}

fn value(b: &Bound<Rational>) -> Option<&Rational> {
    match b {
        Bound::Included(q) | Bound::Excluded(q) => Some(q),
        Bound::Unbounded => None,
    }
}

/// Order lower bounds: the one admitting smaller points first.
fn cmp_lo(a: &Bound<Rational>, b: &Bound<Rational>) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Less,
        (_, Bound::Unbounded) => Ordering::Greater,
        _ => {
            let (va, vb) = (value(a).unwrap(), value(b).unwrap());
            va.cmp(vb).then_with(|| match (a, b) {
                (Bound::Included(_), Bound::Excluded(_)) => Ordering::Less,
                (Bound::Excluded(_), Bound::Included(_)) => Ordering::Greater,
                _ => Ordering::Equal,
            })
        }
    }
}

/// Order upper bounds: the one admitting larger points last.
fn cmp_hi(a: &Bound<Rational>, b: &Bound<Rational>) -> Ordering {
    match (a, b) {
        (Bound::Unbounded, Bound::Unbounded) => Ordering::Equal,
        (Bound::Unbounded, _) => Ordering::Greater,
        (_, Bound::Unbounded) => Ordering::Less,
        _ => {
            let (va, vb) = (value(a).unwrap(), value(b).unwrap());
            va.cmp(vb).then_with(|| match (a, b) {
                (Bound::Included(_), Bound::Excluded(_)) => Ordering::Greater,
                (Bound::Excluded(_), Bound::Included(_)) => Ordering::Less,
                _ => Ordering::Equal,
            })
        }
    }
}

impl Span {
    pub fn full() -> Self {
        Self { lo: Bound::Unbounded, hi: Bound::Unbounded }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Self {
        Self { lo: Bound::Included(lo), hi: Bound::Included(hi) }
    }

    pub fn empty() -> Self {
        let z = Rational::zero();
        Self { lo: Bound::Excluded(z.clone()), hi: Bound::Excluded(z) }
    }

    pub fn is_empty(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Bound::Unbounded, _) | (_, Bound::Unbounded) => false,
            (Bound::Included(a), Bound::Included(b)) => a > b,
            (lo, hi) => value(lo).unwrap() >= value(hi).unwrap(),
        }
    }

    pub fn contains(&self, t: &Rational) -> bool {
        let lo_ok = match &self.lo {
            Bound::Unbounded => true,
            Bound::Included(a) => t >= a,
            Bound::Excluded(a) => t > a,
        };
        let hi_ok = match &self.hi {
            Bound::Unbounded => true,
            Bound::Included(b) => t <= b,
            Bound::Excluded(b) => t < b,
        };
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Span) -> Span {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Less { other.lo.clone() } else { self.lo.clone() };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Greater { other.hi.clone() } else { self.hi.clone() };
        Span { lo, hi }
    }

    /// Solution set of `a·t + b > 0` (strict) or `≥ 0`.
    pub fn linear(a: &Rational, b: &Rational, strict: bool) -> Span {
        if a.is_zero() {
            let ok = if strict { b.is_positive() } else { !b.is_negative() };
            return if ok { Span::full() } else { Span::empty() };
        }
        let root = -b / a;
        let end = if strict { Bound::Excluded(root) } else { Bound::Included(root) };
        if a.is_positive() {
            Span { lo: end, hi: Bound::Unbounded }
        } else {
            Span { lo: Bound::Unbounded, hi: end }
        }
    }

    pub fn lo_value(&self) -> Option<&Rational> {
        value(&self.lo)
    }

    pub fn hi_value(&self) -> Option<&Rational> {
        value(&self.hi)
    }

    /// Smallest span containing both (assumes they overlap or touch).
    pub fn hull(&self, other: &Span) -> Span {
        let lo = if cmp_lo(&self.lo, &other.lo) == Ordering::Greater { other.lo.clone() } else { self.lo.clone() };
        let hi = if cmp_hi(&self.hi, &other.hi) == Ordering::Less { other.hi.clone() } else { self.hi.clone() };
        Span { lo, hi }
    }
}

/// Whether the union of `parts` contains every point of `target`.
pub fn covers(target: &Span, parts: &[Span]) -> bool {
    if target.is_empty() {
        return true;
    }
    let parts: Vec<&Span> = parts.iter().filter(|p| !p.is_empty()).collect();
    // `need` is a lower bound: every point of the target admitted by it must still be covered.
    let mut need = target.lo.clone();
    for _ in 0..=parts.len() {
        let done = match (&need, &target.hi) {
            (Bound::Unbounded, _) => false,
            (_, Bound::Unbounded) => false,
            (Bound::Excluded(h), Bound::Included(t)) => h >= t,
            (Bound::Excluded(h), Bound::Excluded(t)) => h >= t,
            (Bound::Included(h), Bound::Included(t)) => h > t,
            (Bound::Included(h), Bound::Excluded(t)) => h >= t,
        };
        if done {
            return true;
        }
        // A part extends coverage if it starts at or before `need` and reaches past it.
        let best = parts
            .iter()
            .filter(|p| cmp_lo(&p.lo, &need) != Ordering::Greater && reaches_past(&p.hi, &need))
            .max_by(|a, b| cmp_hi(&a.hi, &b.hi));
        let Some(best) = best else { return false };
        need = match &best.hi {
            Bound::Unbounded => return true,
            Bound::Included(h) => Bound::Excluded(h.clone()),
            Bound::Excluded(h) => Bound::Included(h.clone()),
        };
    }
    false
}

fn reaches_past(hi: &Bound<Rational>, need: &Bound<Rational>) -> bool {
    match (hi, need) {
        (Bound::Unbounded, _) => true,
        (_, Bound::Unbounded) => false,
        (Bound::Included(h), Bound::Included(n)) => h >= n,
        (Bound::Included(h), Bound::Excluded(n)) => h > n,
        (Bound::Excluded(h), Bound::Included(n)) => h > n,
        (Bound::Excluded(h), Bound::Excluded(n)) => h > n,
    }
}
