//! Subsets of the altruism domain `[0, 1]` built from finitely many intervals.

use serde::{Deserialize, Serialize};

/// An interval of α values with independently open or closed ends.
///
/// A closed interval with `lo == hi` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl AlphaInterval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn point(at: f64) -> Self {
        Self::closed(at, at)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, alpha: f64) -> bool {
        let above = if self.lo_closed {
            alpha >= self.lo
        } else {
            alpha > self.lo
        };
        let below = if self.hi_closed {
            alpha <= self.hi
        } else {
            alpha < self.hi
        };
        above && below
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

impl std::fmt::Display for AlphaInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

/// A finite union of disjoint, sorted α intervals.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaSet {
    intervals: Vec<AlphaInterval>,
}

impl AlphaSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[AlphaInterval] {
        &self.intervals
    }

    pub fn contains(&self, alpha: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(alpha))
    }

    /// Builds the set of points where `member` holds, given that `member` is
    /// constant strictly between consecutive `breakpoints`.
    ///
    /// `breakpoints` must be sorted, start at 0 and end at 1. `member` is
    /// probed at every breakpoint and every gap midpoint; adjacent pieces are
    /// merged.
    pub fn from_piecewise(breakpoints: &[f64], mut member: impl FnMut(f64) -> bool) -> Self {
        let mut set = AlphaSet::empty();
        for (k, &p) in breakpoints.iter().enumerate() {
            if member(p) {
                set.push(AlphaInterval::point(p));
            }
            if let Some(&next) = breakpoints.get(k + 1) {
                if next > p && member(0.5 * (p + next)) {
                    set.push(AlphaInterval {
                        lo: p,
                        hi: next,
                        lo_closed: false,
                        hi_closed: false,
                    });
                }
            }
        }
        set
    }

    /// Appends an interval lying to the right of everything already present,
    /// merging with the last interval when they touch.
    fn push(&mut self, iv: AlphaInterval) {
        if iv.is_empty() {
            return;
        }
        if let Some(last) = self.intervals.last_mut() {
            let touches = last.hi == iv.lo && (last.hi_closed || iv.lo_closed);
            if touches {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                    last.hi_closed = iv.hi_closed;
                } else if iv.hi == last.hi {
                    last.hi_closed |= iv.hi_closed;
                }
                return;
            }
        }
        self.intervals.push(iv);
    }
}

impl std::fmt::Display for AlphaSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}
