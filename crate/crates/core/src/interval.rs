use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed interval [lo, hi] with lo ≤ hi. Degenerate (point) intervals are
/// allowed in general use; construction intervals are validated strict where
/// it matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self> {
        if lo > hi {
            return Err(Error::Input(format!("interval bounds reversed: [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Like `new` but panics; for endpoints already known to be ordered.
    pub fn make(lo: Scalar, hi: Scalar) -> Self {
        assert!(lo <= hi, "interval bounds reversed: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: Scalar) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn unit() -> Self {
        Interval::make(Scalar::zero(), Scalar::one())
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn diameter(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lo + &self.hi).half()
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed-set intersection test (touching endpoints count).
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn strictly_left_of(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn translate(&self, t: &Scalar) -> Interval {
        Interval {
            lo: &self.lo + t,
            hi: &self.hi + t,
        }
    }

    /// Affine image s·x + t. A negative s reverses the endpoints.
    pub fn affine(&self, s: &Scalar, t: &Scalar) -> Interval {
        let a = &(s * &self.lo) + t;
        let b = &(s * &self.hi) + t;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    /// Minkowski sum of two closed intervals.
    pub fn minkowski(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Symmetric widening by r ≥ 0.
    pub fn widen(&self, r: &Scalar) -> Interval {
        Interval {
            lo: &self.lo - r,
            hi: &self.hi + r,
        }
    }

    pub fn distance_to_point(&self, x: &Scalar) -> Scalar {
        if x < &self.lo {
            &self.lo - x
        } else if x > &self.hi {
            x - &self.hi
        } else {
            Scalar::zero()
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo.is_exact() && self.hi.is_exact()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.lo.to_f64(), self.hi.to_f64())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
