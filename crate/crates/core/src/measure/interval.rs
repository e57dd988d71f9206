use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::{self, Scalar};
use crate::Error;

/// Half-open interval `[lo, hi)` inside `[0, 1)`, with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntervalJson", into = "IntervalJson")]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self, Error> {
        if lo.is_negative() || hi > Scalar::one() || lo >= hi {
            return Err(Error::InvalidInterval(format!(
                "[{}, {})",
                scalar::format(&lo),
                scalar::format(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Unchecked constructor for values already known to satisfy the invariant.
    pub(crate) fn raw(lo: Scalar, hi: Scalar) -> Self {
        debug_assert!(lo < hi, "empty interval");
        Interval { lo, hi }
    }

    pub fn unit() -> Self {
        Interval::raw(Scalar::zero(), Scalar::one())
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn measure(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = scalar::max(&self.lo, &other.lo);
        let hi = scalar::min(&self.hi, &other.hi);
        (lo < hi).then(|| Interval::raw(lo, hi))
    }

    pub(crate) fn translate(&self, d: &Scalar) -> Interval {
        Interval::raw(&self.lo + d, &self.hi + d)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", scalar::format(&self.lo), scalar::format(&self.hi))
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalJson {
    lo: String,
    hi: String,
}

impl TryFrom<IntervalJson> for Interval {
    type Error = Error;
    fn try_from(j: IntervalJson) -> Result<Self, Error> {
        Interval::new(scalar::parse(&j.lo)?, scalar::parse(&j.hi)?)
    }
}

impl From<Interval> for IntervalJson {
    fn from(i: Interval) -> Self {
        IntervalJson {
            lo: scalar::format(&i.lo),
            hi: scalar::format(&i.hi),
        }
    }
}

/// Finite union of intervals in canonical form: sorted, disjoint, and with
/// touching intervals merged. Structural equality is set equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn unit() -> Self {
        IntervalSet::from(Interval::unit())
    }

    /// Union of arbitrary (possibly overlapping) intervals.
    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = intervals.into_iter().collect();
        v.sort_by(|a, b| a.lo.cmp(&b.lo));
        IntervalSet::from_sorted(v)
    }

    /// Canonicalizes intervals already sorted by left endpoint.
    pub(crate) fn from_sorted(v: Vec<Interval>) -> Self {
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Scalar {
        self.intervals.iter().map(Interval::measure).sum()
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.hi <= x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::with_capacity(self.intervals.len() + other.intervals.len());
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() || j < other.intervals.len() {
            let take_left = match (self.intervals.get(i), other.intervals.get(j)) {
                (Some(a), Some(b)) => a.lo <= b.lo,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                v.push(self.intervals[i].clone());
                i += 1;
            } else {
                v.push(other.intervals[j].clone());
                j += 1;
            }
        }
        IntervalSet::from_sorted(v)
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a IntervalSet>) -> IntervalSet {
        IntervalSet::from_intervals(sets.into_iter().flat_map(|s| s.intervals.iter().cloned()))
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = &self.intervals[i];
            let b = &other.intervals[j];
            if let Some(c) = a.intersect(b) {
                out.push(c);
            }
            if a.hi <= b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_sorted(out)
    }

    pub fn difference(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let mut j = 0;
        for a in &self.intervals {
            let mut cur = a.lo.clone();
            while j < other.intervals.len() && other.intervals[j].hi <= cur {
                j += 1;
            }
            let mut k = j;
            while k < other.intervals.len() && other.intervals[k].lo < a.hi {
                let b = &other.intervals[k];
                if b.lo > cur {
                    out.push(Interval::raw(cur.clone(), b.lo.clone()));
                }
                if b.hi > cur {
                    cur = b.hi.clone();
                }
                if cur >= a.hi {
                    break;
                }
                k += 1;
            }
            if cur < a.hi {
                out.push(Interval::raw(cur, a.hi.clone()));
            }
        }
        IntervalSet::from_sorted(out)
    }

    pub fn complement(&self) -> IntervalSet {
        IntervalSet::unit().difference(self)
    }

    pub fn is_subset_of(&self, other: &IntervalSet) -> bool {
        self.difference(other).is_empty()
    }

    pub fn is_disjoint_from(&self, other: &IntervalSet) -> bool {
        self.intersection(other).is_empty()
    }

    /// Measure of `self ∩ [0, x)`: the position of `x` in left-to-right order.
    pub fn position_of(&self, x: &Scalar) -> Scalar {
        let mut acc = Scalar::zero();
        for iv in &self.intervals {
            if &iv.hi <= x {
                acc += iv.measure();
            } else {
                if &iv.lo < x {
                    acc += x - &iv.lo;
                }
                break;
            }
        }
        acc
    }

    /// The part of the set occupying positions `[a, b)` in left-to-right order.
    pub fn slice_by_measure(&self, a: &Scalar, b: &Scalar) -> IntervalSet {
        let mut out = Vec::new();
        let mut start = Scalar::zero();
        for iv in &self.intervals {
            let len = iv.measure();
            let end = &start + &len;
            if &end <= a {
                start = end;
                continue;
            }
            if &start >= b {
                break;
            }
            let lo = &iv.lo + scalar::max(&Scalar::zero(), &(a - &start));
            let hi = &iv.lo + scalar::min(&len, &(b - &start));
            if lo < hi {
                out.push(Interval::raw(lo, hi));
            }
            start = end;
        }
        IntervalSet::from_sorted(out)
    }

    /// Splits into the leftmost part of measure `m` and the rest.
    pub fn split_at_measure(&self, m: &Scalar) -> (IntervalSet, IntervalSet) {
        let total = self.measure();
        (
            self.slice_by_measure(&Scalar::zero(), m),
            self.slice_by_measure(m, &total),
        )
    }

    /// Cuts the set into consecutive pieces of the given measures (in order).
    /// Any leftover measure is returned as the final element.
    pub fn cut(&self, measures: &[Scalar]) -> Vec<IntervalSet> {
        let mut out = Vec::with_capacity(measures.len() + 1);
        let mut pos = Scalar::zero();
        for m in measures {
            let next = &pos + m;
            out.push(self.slice_by_measure(&pos, &next));
            pos = next;
        }
        out.push(self.slice_by_measure(&pos, &self.measure()));
        out
    }

    pub fn first_lo(&self) -> Option<&Scalar> {
        self.intervals.first().map(Interval::lo)
    }
}

impl From<Interval> for IntervalSet {
    fn from(iv: Interval) -> Self {
        IntervalSet { intervals: vec![iv] }
    }
}

impl PartialOrd for IntervalSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders sets by their leftmost point (empty first); used for stable tie-breaking.
impl Ord for IntervalSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let key = |s: &IntervalSet| s.intervals.iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect::<Vec<_>>();
        key(self).cmp(&key(other))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
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
