use num::Signed;
use serde::{Deserialize, Serialize};

use super::{in_causal_future, int, Diamond, GeometryError, Point, Rational};

/// Graph `t = f(x)` of a piecewise-linear 1-Lipschitz function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CauchyGraph {
    pub breakpoints: Vec<Point>,
    #[serde(with = "crate::serde_rational")]
    pub left_slope: Rational,
    #[serde(with = "crate::serde_rational")]
    pub right_slope: Rational,
}

impl CauchyGraph {
    pub fn eval(&self, x: &Rational) -> Rational {
        let first = &self.breakpoints[0];
        let last = &self.breakpoints[self.breakpoints.len() - 1];
        if x <= &first.x {
            return &first.t + &self.left_slope * (x - &first.x);
        }
        if x >= &last.x {
            return &last.t + &self.right_slope * (x - &last.x);
        }
        for w in self.breakpoints.windows(2) {
            if x <= &w[1].x {
                let slope = (&w[1].t - &w[0].t) / (&w[1].x - &w[0].x);
                return &w[0].t + slope * (x - &w[0].x);
            }
        }
        unreachable!("x lies between the first and last breakpoint")
    }

    pub fn is_lipschitz(&self) -> bool {
        let one = int(1);
        self.left_slope.abs() <= one
            && self.right_slope.abs() <= one
            && self.breakpoints.windows(2).all(|w| (&w[1].t - &w[0].t).abs() <= (&w[1].x - &w[0].x).abs())
    }
}

/// Upper boundary of `J⁻(K)` for a diamond `K`.
pub fn past_envelope(k: &Diamond, x: &Rational) -> Rational {
    &k.top.t - (x - &k.top.x).abs()
}

/// Lower boundary of `J⁺(L)` for a diamond `L`.
pub fn future_envelope(l: &Diamond, x: &Rational) -> Rational {
    &l.bottom.t + (x - &l.bottom.x).abs()
}

/// A Cauchy surface lying strictly between `J⁻(K)` and `J⁺(L)`.
///
/// The surface is the pointwise average of the two null envelopes.
pub fn separating_cauchy_surface(k: &Diamond, l: &Diamond) -> Result<CauchyGraph, GeometryError> {
    if in_causal_future(&l.bottom, &k.top) {
        return Err(GeometryError::PreconditionViolated(format!(
            "bottom tip {} of L lies in the causal past of the top tip {} of K",
            l.bottom, k.top
        )));
    }
    let f = |x: &Rational| (past_envelope(k, x) + future_envelope(l, x)) / int(2);
    let mut xs = vec![k.top.x.clone(), l.bottom.x.clone()];
    xs.sort();
    xs.dedup();
    let breakpoints = xs.iter().map(|x| Point::new(f(x), x.clone())).collect();
    Ok(CauchyGraph { breakpoints, left_slope: int(0), right_slope: int(0) })
}
