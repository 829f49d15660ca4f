//! Extended non-negative reals used for energy values.
//!
//! Limit functionals take the value `+inf` on large classes of inputs (a jump
//! under a pure bulk energy, a slope under a pure jump energy). That value is
//! carried explicitly instead of through `f64::INFINITY` so that it can never
//! come out of an overflow.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Infinite,
}

impl Energy {
    pub const ZERO: Energy = Energy::Finite(0.0);

    pub fn is_infinite(self) -> bool {
        matches!(self, Energy::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Energy::Finite(v) => Some(v),
            Energy::Infinite => None,
        }
    }

    /// Numeric view for printing and plotting; `Infinite` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Energy::Finite(v) => v,
            Energy::Infinite => f64::INFINITY,
        }
    }

    pub fn min(self, other: Energy) -> Energy {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Multiplication by a non-negative scalar. `0 * inf` is taken as `inf`,
    /// which is the convention for energies restricted to a null set.
    pub fn scale(self, c: f64) -> Energy {
        debug_assert!(c >= 0.0);
        match self {
            Energy::Finite(v) => Energy::Finite(v * c),
            Energy::Infinite => Energy::Infinite,
        }
    }
}

impl Default for Energy {
    fn default() -> Self {
        Energy::ZERO
    }
}

impl From<f64> for Energy {
    fn from(v: f64) -> Self {
        Energy::Finite(v)
    }
}

impl PartialOrd for Energy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Energy::Finite(a), Energy::Finite(b)) => a.partial_cmp(b),
            (Energy::Finite(_), Energy::Infinite) => Some(Ordering::Less),
            (Energy::Infinite, Energy::Finite(_)) => Some(Ordering::Greater),
            (Energy::Infinite, Energy::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl Add for Energy {
    type Output = Energy;

    fn add(self, rhs: Energy) -> Energy {
        match (self, rhs) {
            (Energy::Finite(a), Energy::Finite(b)) => Energy::Finite(a + b),
            _ => Energy::Infinite,
        }
    }
}

impl Add<f64> for Energy {
    type Output = Energy;

    fn add(self, rhs: f64) -> Energy {
        self + Energy::Finite(rhs)
    }
}

impl Mul<f64> for Energy {
    type Output = Energy;

    fn mul(self, rhs: f64) -> Energy {
        self.scale(rhs)
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        let mut acc = crate::numeric::KahanSum::default();
        for e in iter {
            match e {
                Energy::Finite(v) => acc.add(v),
                Energy::Infinite => return Energy::Infinite,
            }
        }
        Energy::Finite(acc.value())
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Energy::Finite(v) => write!(f, "{v}"),
            Energy::Infinite => write!(f, "inf"),
        }
    }
}
