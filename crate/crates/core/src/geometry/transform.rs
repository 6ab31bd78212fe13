use num::One;
use serde::{Deserialize, Serialize};

use super::{int, Diamond, Point, Rational, Worldline};

/// A causal automorphism of the plane that keeps coordinates rational:
/// `u ↦ scale·boost·u`, `v ↦ scale·v/boost`, then a translation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transform {
    #[serde(with = "crate::serde_rational")]
    pub scale: Rational,
    #[serde(with = "crate::serde_rational")]
    pub boost: Rational,
    #[serde(with = "crate::serde_rational")]
    pub shift_t: Rational,
    #[serde(with = "crate::serde_rational")]
    pub shift_x: Rational,
}

impl Transform {
    pub fn identity() -> Self {
        Self { scale: Rational::one(), boost: Rational::one(), shift_t: int(0), shift_x: int(0) }
    }

    pub fn point(&self, p: &Point) -> Point {
        let u = p.u() * &self.scale * &self.boost;
        let v = p.v() * &self.scale / &self.boost;
        Point::from_null(&u, &v).translated(&self.shift_t, &self.shift_x)
    }

    pub fn velocity(&self, w: &Rational) -> Rational {
        let one = Rational::one();
        let du = (&one + w) * &self.boost;
        let dv = (&one - w) / &self.boost;
        (&du - &dv) / (&du + &dv)
    }

    pub fn diamond(&self, d: &Diamond) -> Diamond {
        d.map(|p| self.point(p))
    }

    pub fn worldline(&self, w: &Worldline) -> Worldline {
        w.map_points(|p| self.point(p), |v| self.velocity(v))
    }
}
