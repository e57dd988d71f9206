use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::interval::{Interval, IntervalSet};
use crate::scalar::{self, Scalar};
use crate::Error;

/// One branch: `x ↦ x + offset` on `source`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Branch {
    source: Interval,
    offset: Scalar,
}

impl Branch {
    pub fn new(source: Interval, offset: Scalar) -> Result<Self, Error> {
        Interval::new(source.lo() + &offset, source.hi() + &offset)?;
        Ok(Branch { source, offset })
    }

    pub(crate) fn raw(source: Interval, offset: Scalar) -> Self {
        Branch { source, offset }
    }

    pub fn source(&self) -> &Interval {
        &self.source
    }

    pub fn offset(&self) -> &Scalar {
        &self.offset
    }

    pub fn image(&self) -> Interval {
        self.source.translate(&self.offset)
    }
}

/// Injective piecewise translation between two interval sets of `[0, 1)`.
///
/// When domain and image are both `[0, 1)` this is an interval exchange, i.e.
/// an invertible measure-preserving map. Branches are kept sorted by source and
/// contiguous branches with equal offsets are merged, so equality is equality
/// of maps (mod null sets).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TranslationJson", into = "TranslationJson")]
pub struct PiecewiseTranslation {
    branches: Vec<Branch>,
}

impl PiecewiseTranslation {
    pub fn new(branches: impl IntoIterator<Item = Branch>) -> Result<Self, Error> {
        let mut v: Vec<Branch> = branches.into_iter().collect();
        v.sort_by(|a, b| a.source.lo().cmp(b.source.lo()));
        for w in v.windows(2) {
            if w[0].source.hi() > w[1].source.lo() {
                return Err(Error::InvalidInput(format!(
                    "branch sources {} and {} overlap",
                    w[0].source, w[1].source
                )));
            }
        }
        for b in &v {
            if b.image().lo() < &Scalar::zero() || b.image().hi() > &Scalar::one() {
                return Err(Error::InvalidInput(format!("image of branch {} leaves [0,1)", b.source)));
            }
        }
        let mut imgs: Vec<Interval> = v.iter().map(Branch::image).collect();
        imgs.sort_by(|a, b| a.lo().cmp(b.lo()));
        for w in imgs.windows(2) {
            if w[0].hi() > w[1].lo() {
                return Err(Error::NotBijective(format!("images {} and {} overlap", w[0], w[1])));
            }
        }
        Ok(PiecewiseTranslation::from_sorted(v))
    }

    /// Canonicalizes branches already sorted by source with disjoint images.
    pub(crate) fn from_sorted(v: Vec<Branch>) -> Self {
        let mut out: Vec<Branch> = Vec::with_capacity(v.len());
        for b in v {
            if let Some(last) = out.last_mut() {
                if last.source.hi() == b.source.lo() && last.offset == b.offset {
                    last.source = Interval::raw(last.source.lo().clone(), b.source.hi().clone());
                    continue;
                }
            }
            out.push(b);
        }
        PiecewiseTranslation { branches: out }
    }

    pub(crate) fn from_unsorted(mut v: Vec<Branch>) -> Self {
        v.sort_by(|a, b| a.source.lo().cmp(b.source.lo()));
        PiecewiseTranslation::from_sorted(v)
    }

    pub fn identity(domain: &IntervalSet) -> Self {
        PiecewiseTranslation::from_sorted(
            domain.intervals().iter().map(|iv| Branch::raw(iv.clone(), Scalar::zero())).collect(),
        )
    }

    /// `x ↦ x + α mod 1` for `0 ≤ α < 1`.
    pub fn rotation(alpha: &Scalar) -> Result<Self, Error> {
        if alpha < &Scalar::zero() || alpha >= &Scalar::one() {
            return Err(Error::InvalidInput(format!("rotation angle {} not in [0,1)", scalar::format(alpha))));
        }
        if alpha.is_zero() {
            return Ok(PiecewiseTranslation::identity(&IntervalSet::unit()));
        }
        let cut = Scalar::one() - alpha;
        Ok(PiecewiseTranslation::from_sorted(vec![
            Branch::raw(Interval::raw(Scalar::zero(), cut.clone()), alpha.clone()),
            Branch::raw(Interval::raw(cut, Scalar::one()), alpha - Scalar::one()),
        ]))
    }

    /// The unique increasing translation-by-pieces carrying `from` onto `to`,
    /// pairing points by their position (cumulative measure) in each set.
    pub fn order_preserving(from: &IntervalSet, to: &IntervalSet) -> Result<Self, Error> {
        if from.measure() != to.measure() {
            return Err(Error::DomainMismatch(format!(
                "cannot map a set of measure {} onto one of measure {}",
                scalar::format(&from.measure()),
                scalar::format(&to.measure())
            )));
        }
        let (a, b) = (from.intervals(), to.intervals());
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let mut pa = a.first().map(|iv| iv.lo().clone()).unwrap_or_default();
        let mut pb = b.first().map(|iv| iv.lo().clone()).unwrap_or_default();
        while i < a.len() && j < b.len() {
            let ra = a[i].hi() - &pa;
            let rb = b[j].hi() - &pb;
            let len = scalar::min(&ra, &rb);
            let hi = &pa + &len;
            out.push(Branch::raw(Interval::raw(pa.clone(), hi.clone()), &pb - &pa));
            pa = hi;
            pb = &pb + &len;
            if &pa == a[i].hi() {
                i += 1;
                if i < a.len() {
                    pa = a[i].lo().clone();
                }
            }
            if &pb == b[j].hi() {
                j += 1;
                if j < b.len() {
                    pb = b[j].lo().clone();
                }
            }
        }
        Ok(PiecewiseTranslation::from_sorted(out))
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    pub fn domain(&self) -> IntervalSet {
        IntervalSet::from_sorted(self.branches.iter().map(|b| b.source.clone()).collect())
    }

    pub fn image(&self) -> IntervalSet {
        IntervalSet::from_intervals(self.branches.iter().map(Branch::image))
    }

    pub fn is_bijection_of(&self, set: &IntervalSet) -> bool {
        &self.domain() == set && &self.image() == set
    }

    fn branch_index(&self, x: &Scalar) -> Option<usize> {
        let idx = self.branches.partition_point(|b| b.source.hi() <= x);
        self.branches.get(idx).filter(|b| b.source.contains(x)).map(|_| idx)
    }

    pub fn apply(&self, x: &Scalar) -> Result<Scalar, Error> {
        self.branch_index(x)
            .map(|i| x + &self.branches[i].offset)
            .ok_or_else(|| Error::PointOutsideDomain(scalar::format(x)))
    }

    /// `self ∘ s`: apply `s` first. The image of `s` must lie in the domain of `self`.
    pub fn compose(&self, s: &PiecewiseTranslation) -> Result<Self, Error> {
        let out = self.compose_partial(s);
        if out.domain() != s.domain() {
            return Err(Error::DomainMismatch(
                "image of the inner map is not contained in the domain of the outer map".into(),
            ));
        }
        Ok(out)
    }

    /// `self ∘ s` on the part of the domain of `s` that `s` sends into the domain of `self`.
    pub fn compose_partial(&self, s: &PiecewiseTranslation) -> Self {
        let mut out = Vec::with_capacity(s.branches.len() + self.branches.len());
        for b in &s.branches {
            let img = b.image();
            let start = self.branches.partition_point(|t| t.source.hi() <= img.lo());
            for t in &self.branches[start..] {
                if t.source.lo() >= img.hi() {
                    break;
                }
                if let Some(c) = t.source.intersect(&img) {
                    out.push(Branch::raw(
                        Interval::raw(c.lo() - &b.offset, c.hi() - &b.offset),
                        &b.offset + &t.offset,
                    ));
                }
            }
        }
        PiecewiseTranslation::from_sorted(out)
    }

    /// Inverse of a bijection of its own domain.
    pub fn invert(&self) -> Result<Self, Error> {
        let (dom, img) = (self.domain(), self.image());
        if dom != img {
            return Err(Error::NotBijective(format!("domain {dom} differs from image {img}")));
        }
        Ok(self.inverse_partial())
    }

    /// Inverse as a map from the image back onto the domain.
    pub fn inverse_partial(&self) -> Self {
        PiecewiseTranslation::from_unsorted(
            self.branches.iter().map(|b| Branch::raw(b.image(), -b.offset.clone())).collect(),
        )
    }

    pub fn restrict(&self, set: &IntervalSet) -> Self {
        let mut out = Vec::new();
        for iv in set.intervals() {
            let start = self.branches.partition_point(|b| b.source.hi() <= iv.lo());
            for b in &self.branches[start..] {
                if b.source.lo() >= iv.hi() {
                    break;
                }
                if let Some(c) = b.source.intersect(iv) {
                    out.push(Branch::raw(c, b.offset.clone()));
                }
            }
        }
        PiecewiseTranslation::from_sorted(out)
    }

    pub fn image_of(&self, set: &IntervalSet) -> IntervalSet {
        self.restrict(set).image()
    }

    /// Preimage of `set` under this map.
    pub fn preimage_of(&self, set: &IntervalSet) -> IntervalSet {
        self.inverse_partial().image_of(set)
    }

    /// Glues two maps with disjoint domains and disjoint images.
    pub fn union(&self, other: &PiecewiseTranslation) -> Result<Self, Error> {
        if !self.domain().is_disjoint_from(&other.domain()) {
            return Err(Error::DomainMismatch("domains overlap".into()));
        }
        if !self.image().is_disjoint_from(&other.image()) {
            return Err(Error::NotBijective("images overlap".into()));
        }
        let mut v = self.branches.clone();
        v.extend(other.branches.iter().cloned());
        Ok(PiecewiseTranslation::from_unsorted(v))
    }

    /// `T^n` for a bijection of its domain, by repeated squaring.
    pub fn power(&self, n: u64) -> Result<Self, Error> {
        let mut result = PiecewiseTranslation::identity(&self.domain());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = base.compose(&result)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(result)
    }

    /// Set of points where the two maps disagree, including points in exactly
    /// one of the two domains.
    pub fn disagreement(&self, other: &PiecewiseTranslation) -> IntervalSet {
        let mut cuts: Vec<&Scalar> = Vec::new();
        for b in self.branches.iter().chain(other.branches.iter()) {
            cuts.push(b.source.lo());
            cuts.push(b.source.hi());
        }
        cuts.sort();
        cuts.dedup();
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while i < self.branches.len() && self.branches[i].source.hi() <= lo {
                i += 1;
            }
            while j < other.branches.len() && other.branches[j].source.hi() <= lo {
                j += 1;
            }
            let a = self.branches.get(i).filter(|b| b.source.lo() <= lo).map(|b| &b.offset);
            let b = other.branches.get(j).filter(|b| b.source.lo() <= lo).map(|b| &b.offset);
            if a != b {
                out.push(Interval::raw(lo.clone(), hi.clone()));
            }
        }
        IntervalSet::from_sorted(out)
    }
}

#[derive(Serialize, Deserialize)]
struct BranchJson {
    lo: String,
    hi: String,
    offset: String,
}

#[derive(Serialize, Deserialize)]
struct TranslationJson {
    branches: Vec<BranchJson>,
}

impl TryFrom<TranslationJson> for PiecewiseTranslation {
    type Error = Error;
    fn try_from(j: TranslationJson) -> Result<Self, Error> {
        let mut v = Vec::with_capacity(j.branches.len());
        for b in j.branches {
            let src = Interval::new(scalar::parse(&b.lo)?, scalar::parse(&b.hi)?)?;
            v.push(Branch::new(src, scalar::parse(&b.offset)?)?);
        }
        PiecewiseTranslation::new(v)
    }
}

impl From<PiecewiseTranslation> for TranslationJson {
    fn from(t: PiecewiseTranslation) -> Self {
        TranslationJson {
            branches: t
                .branches
                .into_iter()
                .map(|b| BranchJson {
                    lo: scalar::format(b.source.lo()),
                    hi: scalar::format(b.source.hi()),
                    offset: scalar::format(&b.offset),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::StepFunction;
    use crate::scalar::{int, ratio};

    fn iv(a: i64, b: i64, d: i64) -> Interval {
        Interval::new(ratio(a, d), ratio(b, d)).unwrap()
    }

    fn swap() -> PiecewiseTranslation {
        PiecewiseTranslation::new([
            Branch::new(iv(0, 1, 2), ratio(1, 2)).unwrap(),
            Branch::new(iv(1, 2, 2), ratio(-1, 2)).unwrap(),
        ])
        .unwrap()
    }

    /// Rotation by `p/q` split into `q` unit branches, the way a hand-built table looks.
    fn rotation_fine(p: i64, q: i64) -> PiecewiseTranslation {
        PiecewiseTranslation::new((0..q).map(|k| {
            let target = (k + p) % q;
            Branch::new(iv(k, k + 1, q), ratio(target - k, q)).unwrap()
        }))
        .unwrap()
    }

    #[test]
    fn apply_examples() {
        let id = PiecewiseTranslation::identity(&IntervalSet::unit());
        assert_eq!(id.apply(&ratio(1, 3)).unwrap(), ratio(1, 3));
        assert_eq!(rotation_fine(1, 3).apply(&ratio(5, 6)).unwrap(), ratio(1, 6));
        assert_eq!(swap().apply(&ratio(1, 4)).unwrap(), ratio(3, 4));
        let half = PiecewiseTranslation::identity(&IntervalSet::from(iv(0, 1, 2)));
        assert!(matches!(half.apply(&ratio(3, 4)), Err(Error::PointOutsideDomain(_))));
    }

    #[test]
    fn fine_rotation_is_canonically_the_two_branch_rotation() {
        assert_eq!(rotation_fine(1, 3), PiecewiseTranslation::rotation(&ratio(1, 3)).unwrap());
    }

    #[test]
    fn compose_and_invert() {
        let id = PiecewiseTranslation::identity(&IntervalSet::unit());
        let r = rotation_fine(1, 3);
        assert_eq!(id.compose(&r).unwrap(), r);
        assert_eq!(r.compose(&r).unwrap(), PiecewiseTranslation::rotation(&ratio(2, 3)).unwrap());
        assert_eq!(r.compose(&r.invert().unwrap()).unwrap(), id);
        assert_eq!(id.invert().unwrap(), id);
        assert_eq!(r.invert().unwrap(), PiecewiseTranslation::rotation(&ratio(2, 3)).unwrap());
        assert_eq!(swap().invert().unwrap(), swap());
        assert_eq!(r.power(3).unwrap(), id);
        let partial = PiecewiseTranslation::new([Branch::new(iv(0, 1, 2), ratio(1, 4)).unwrap()]).unwrap();
        assert!(matches!(partial.invert(), Err(Error::NotBijective(_))));
        let half = PiecewiseTranslation::identity(&IntervalSet::from(iv(0, 1, 2)));
        assert!(matches!(half.compose(&swap()), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn pullback_examples() {
        let f = StepFunction::indicator(&IntervalSet::from(iv(0, 1, 2)));
        let id = PiecewiseTranslation::identity(&IntervalSet::unit());
        assert_eq!(f.pullback(&id).unwrap(), f);
        assert_eq!(
            f.pullback(&swap()).unwrap(),
            StepFunction::indicator(&IntervalSet::from(iv(1, 2, 2)))
        );
        // f(Tx) = 1 iff x + 1/3 mod 1 lies in [0,1/3), i.e. x ∈ [2/3, 1).
        let f = StepFunction::indicator(&IntervalSet::from(iv(0, 1, 3)));
        let r = rotation_fine(1, 3);
        assert_eq!(f.pullback(&r).unwrap(), StepFunction::indicator(&IntervalSet::from(iv(2, 3, 3))));
        // ...and pulling back along the inverse gives [1/3, 2/3).
        assert_eq!(
            f.pullback(&r.invert().unwrap()).unwrap(),
            StepFunction::indicator(&IntervalSet::from(iv(1, 2, 3)))
        );
        for x in [ratio(0, 1), ratio(1, 5), ratio(2, 3), ratio(9, 10)] {
            assert_eq!(f.pullback(&r).unwrap().value_at(&x), f.value_at(&r.apply(&x).unwrap()));
        }
        let half = PiecewiseTranslation::identity(&IntervalSet::from(iv(0, 1, 2)));
        let g = StepFunction::constant_on(&IntervalSet::unit(), int(1));
        assert!(matches!(g.pullback(&half), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn order_preserving_pairs_by_position() {
        let from = IntervalSet::from_intervals([iv(0, 1, 8), iv(4, 5, 8)]);
        let to = IntervalSet::from(iv(5, 7, 8));
        let m = PiecewiseTranslation::order_preserving(&from, &to).unwrap();
        assert_eq!(m.domain(), from);
        assert_eq!(m.image(), to);
        assert_eq!(m.apply(&ratio(1, 16)).unwrap(), ratio(11, 16));
        assert_eq!(m.apply(&ratio(9, 16)).unwrap(), ratio(13, 16));
        assert!(PiecewiseTranslation::order_preserving(&from, &IntervalSet::unit()).is_err());
    }

    #[test]
    fn disagreement_set() {
        let id = PiecewiseTranslation::identity(&IntervalSet::unit());
        let t = id
            .restrict(&IntervalSet::from(iv(0, 1, 2)))
            .union(&swap().restrict(&IntervalSet::from(iv(1, 2, 2))).restrict(&IntervalSet::from(iv(1, 2, 2))))
            .ok();
        assert!(t.is_none(), "images overlap, so the union is rejected");
        let a = rotation_fine(1, 4);
        let b = rotation_fine(1, 4).restrict(&IntervalSet::from(iv(0, 3, 4)));
        assert_eq!(a.disagreement(&b), IntervalSet::from(iv(3, 4, 4)));
        assert!(a.disagreement(&a).is_empty());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let r = PiecewiseTranslation::rotation(&ratio(1, 3)).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(
            s,
            r#"{"branches":[{"lo":"0/1","hi":"2/3","offset":"1/3"},{"lo":"2/3","hi":"1/1","offset":"-2/3"}]}"#
        );
        assert_eq!(serde_json::from_str::<PiecewiseTranslation>(&s).unwrap(), r);
        let bad = r#"{"branches":[{"lo":"0/1","hi":"1/2","offset":"1/4"},{"lo":"1/2","hi":"1/1","offset":"0/1"}]}"#;
        assert!(serde_json::from_str::<PiecewiseTranslation>(bad).is_err());
    }
}
