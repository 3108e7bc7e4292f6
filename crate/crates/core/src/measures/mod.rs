//! Lévy measures `λ` on ℝ and mixing measures `π` on `(0, ∞)`.

pub(crate) mod ext;
pub mod levy;
pub mod mixing;
pub mod table;

pub use ext::Ext;
pub use levy::{JumpDistribution, LevyMeasure, LevyMeasureSpec};
pub use mixing::{MixingMeasure, MixingMeasureSpec};
pub use table::TailTable;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Pos,
    Neg,
    Both,
}

impl Side {
    pub(crate) fn includes(self, positive: bool) -> bool {
        match self {
            Side::Both => true,
            Side::Pos => positive,
            Side::Neg => !positive,
        }
    }
}

/// Interval `lo < |z| ≤ hi` (or `lo < x ≤ hi` for mixing measures).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: f64,
    pub hi: f64,
}

impl Region {
    pub const ALL: Region = Region { lo: 0.0, hi: f64::INFINITY };
    pub const SMALL: Region = Region { lo: 0.0, hi: 1.0 };
    pub const LARGE: Region = Region { lo: 1.0, hi: f64::INFINITY };

    pub fn new(lo: f64, hi: f64) -> Self {
        Region { lo, hi }
    }

    pub fn above(r: f64) -> Self {
        Region { lo: r, hi: f64::INFINITY }
    }

    pub fn below(r: f64) -> Self {
        Region { lo: 0.0, hi: r }
    }

    pub(crate) fn contains(&self, v: f64) -> bool {
        v > self.lo && v <= self.hi
    }

    /// Intersection with a support `[s_lo, s_hi]`; `None` when empty.
    pub(crate) fn clip(&self, s_lo: f64, s_hi: f64) -> Option<(f64, f64)> {
        let lo = self.lo.max(s_lo);
        let hi = self.hi.min(s_hi);
        (hi > lo).then_some((lo, hi))
    }
}

/// A critical exponent together with whether the boundary integral is finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Index {
    #[serde(with = "ext::serde_f64")]
    pub value: f64,
    pub attained: bool,
}

impl Index {
    pub fn new(value: f64, attained: bool) -> Self {
        Index { value, attained }
    }

    /// Usable exponent for an infimum-type index: `value` when attained,
    /// else `value + slack`.
    pub fn usable_above(&self, slack: f64) -> f64 {
        if self.attained { self.value } else { self.value + slack }
    }

    /// Usable exponent for a supremum-type index: `value` when attained,
    /// else `value - slack` (never negative).
    pub fn usable_below(&self, slack: f64) -> f64 {
        if self.attained || self.value.is_infinite() { self.value } else { (self.value - slack).max(0.0) }
    }
}
