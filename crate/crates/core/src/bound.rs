//! Extended integer bounds for DBM entries.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// Weight of a DBM edge: a finite integer or `Top` (no constraint, +∞).
///
/// The variant order makes the derived `Ord` treat `Top` as larger than every
/// finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Finite(i64),
    Top,
}

impl Bound {
    pub const ZERO: Bound = Bound::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Bound::Finite(b) => Some(b),
            Bound::Top => None,
        }
    }

    pub fn min(self, other: Bound) -> Bound {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Bound) -> Bound {
        std::cmp::max(self, other)
    }

    /// Saturating shift by a constant; `Top` absorbs.
    pub fn offset(self, c: i64) -> Bound {
        match self {
            Bound::Finite(b) => Bound::Finite(b + c),
            Bound::Top => Bound::Top,
        }
    }
}

impl Add for Bound {
    type Output = Bound;

    fn add(self, rhs: Bound) -> Bound {
        match (self, rhs) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Top,
        }
    }
}

impl PartialEq<i64> for Bound {
    fn eq(&self, other: &i64) -> bool {
        *self == Bound::Finite(*other)
    }
}

impl PartialOrd<i64> for Bound {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&Bound::Finite(*other)))
    }
}

impl From<i64> for Bound {
    fn from(b: i64) -> Self {
        Bound::Finite(b)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(b) => write!(f, "{b}"),
            Bound::Top => write!(f, "+inf"),
        }
    }
}
