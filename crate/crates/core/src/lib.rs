//! Causality checks for finite-dimensional quantum operations carried by
//! worldlines in 1+1 Minkowski spacetime.
//!
//! The crate is split into exact causal geometry ([`geometry`]), dense
//! quantum linear algebra ([`quantum`]), the worldline net model ([`hybrid`]),
//! probe-based measurement ([`fv`]) and channel causality classification
//! ([`causality`]).

pub mod causality;
pub mod fv;
pub mod geometry;
pub mod hybrid;
pub mod quantum;

use serde::{Deserialize, Serialize};

/// Counts from a randomised property check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: usize,
    pub checks: usize,
    pub violations: usize,
}

impl Tally {
    pub fn new(trials: usize) -> Self {
        Self { trials, ..Self::default() }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Record one check.
    pub fn check(&mut self, ok: bool) {
        self.checks += 1;
        if !ok {
            self.violations += 1;
        }
    }
}

pub mod serde_rational {
    //! Rationals as `"p/q"` strings.
    use std::str::FromStr;

    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::geometry::Rational;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub fn parse(s: &str) -> Result<Rational, String> {
        let s = s.trim();
        let r = Rational::from_str(s).map_err(|_| format!("invalid rational {s:?}, expected \"p/q\""))?;
        Ok(r)
    }
}
