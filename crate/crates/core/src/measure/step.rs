use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::interval::{Interval, IntervalSet};
use super::translation::PiecewiseTranslation;
use crate::scalar::{self, Scalar};
use crate::Error;

/// Finite step function on `[0, 1)`, zero off its pieces.
///
/// Canonical form: pieces sorted, disjoint, nonzero, and touching pieces with
/// equal values merged. Two step functions are equal a.e. iff they are equal
/// as values of this type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionJson", into = "StepFunctionJson")]
pub struct StepFunction {
    pieces: Vec<(Interval, Scalar)>,
}

impl StepFunction {
    pub fn zero() -> Self {
        StepFunction::default()
    }

    /// Builds from explicit pieces; fails if two pieces overlap.
    pub fn from_pieces(pieces: impl IntoIterator<Item = (Interval, Scalar)>) -> Result<Self, Error> {
        let mut v: Vec<(Interval, Scalar)> = pieces.into_iter().collect();
        v.sort_by(|a, b| a.0.lo().cmp(b.0.lo()));
        for w in v.windows(2) {
            if w[0].0.hi() > w[1].0.lo() {
                return Err(Error::InvalidInput(format!(
                    "step function pieces {} and {} overlap",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(StepFunction::from_sorted(v))
    }

    /// Builds `Σ v_i · 1_{S_i}` for pairwise disjoint sets `S_i`.
    pub fn from_sets(sets: impl IntoIterator<Item = (IntervalSet, Scalar)>) -> Result<Self, Error> {
        StepFunction::from_pieces(sets.into_iter().flat_map(|(s, v)| {
            s.intervals().iter().cloned().map(move |iv| (iv, v.clone())).collect::<Vec<_>>()
        }))
    }

    pub fn constant_on(set: &IntervalSet, value: Scalar) -> Self {
        StepFunction::from_sorted(set.intervals().iter().map(|iv| (iv.clone(), value.clone())).collect())
    }

    pub fn indicator(set: &IntervalSet) -> Self {
        StepFunction::constant_on(set, scalar::one())
    }

    /// Canonicalizes pieces that are already sorted and disjoint.
    pub(crate) fn from_sorted(v: Vec<(Interval, Scalar)>) -> Self {
        let mut out: Vec<(Interval, Scalar)> = Vec::with_capacity(v.len());
        for (iv, val) in v {
            if val.is_zero() {
                continue;
            }
            if let Some((last, lv)) = out.last_mut() {
                if last.hi() == iv.lo() && *lv == val {
                    *last = Interval::raw(last.lo().clone(), iv.hi().clone());
                    continue;
                }
            }
            out.push((iv, val));
        }
        StepFunction { pieces: out }
    }

    pub fn pieces(&self) -> &[(Interval, Scalar)] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn value_at(&self, x: &Scalar) -> Scalar {
        let idx = self.pieces.partition_point(|(iv, _)| iv.hi() <= x);
        match self.pieces.get(idx) {
            Some((iv, v)) if iv.contains(x) => v.clone(),
            _ => Scalar::zero(),
        }
    }

    /// `∫_over f dμ`, exact.
    pub fn integral(&self, over: &IntervalSet) -> Scalar {
        self.restrict(over).integral_total()
    }

    pub fn integral_total(&self) -> Scalar {
        self.pieces.iter().map(|(iv, v)| iv.measure() * v).sum()
    }

    /// `(∫ f⁺, ∫ f⁻)`, both nonnegative.
    pub fn one_sided_integrals(&self) -> (Scalar, Scalar) {
        let mut pos = Scalar::zero();
        let mut neg = Scalar::zero();
        for (iv, v) in &self.pieces {
            if v.is_positive() {
                pos += iv.measure() * v;
            } else {
                neg -= iv.measure() * v;
            }
        }
        (pos, neg)
    }

    /// `∫ |f|^k dμ` for a nonnegative integer exponent, exact.
    pub fn abs_power_integral(&self, k: u32) -> Scalar {
        if k == 0 {
            return self.support().measure();
        }
        self.pieces
            .iter()
            .map(|(iv, v)| iv.measure() * num_traits::pow(v.abs(), k as usize))
            .sum()
    }

    pub fn sup_norm(&self) -> Scalar {
        self.pieces
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn support(&self) -> IntervalSet {
        IntervalSet::from_sorted(self.pieces.iter().map(|(iv, _)| iv.clone()).collect())
    }

    /// `{x ∈ [0,1) : pred(f(x))}`, including the region where `f = 0`.
    pub fn where_value(&self, pred: impl Fn(&Scalar) -> bool) -> IntervalSet {
        let mut out: Vec<Interval> = self
            .pieces
            .iter()
            .filter(|(_, v)| pred(v))
            .map(|(iv, _)| iv.clone())
            .collect();
        if pred(&Scalar::zero()) {
            out.extend(self.support().complement().intervals().iter().cloned());
            out.sort_by(|a, b| a.lo().cmp(b.lo()));
        }
        IntervalSet::from_sorted(out)
    }

    /// Nonzero values taken by `f`, ascending.
    pub fn distinct_values(&self) -> Vec<Scalar> {
        let set: BTreeSet<Scalar> = self.pieces.iter().map(|(_, v)| v.clone()).collect();
        set.into_iter().collect()
    }

    pub fn map_values(&self, op: impl Fn(&Scalar) -> Scalar) -> StepFunction {
        StepFunction::from_sorted(self.pieces.iter().map(|(iv, v)| (iv.clone(), op(v))).collect())
    }

    pub fn scale(&self, c: &Scalar) -> StepFunction {
        self.map_values(|v| v * c)
    }

    pub fn neg(&self) -> StepFunction {
        self.map_values(|v| -v)
    }

    /// Pointwise `op(f, g)` on the common refinement. `op(0, 0)` must be 0.
    pub fn combine(&self, other: &StepFunction, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> StepFunction {
        let mut cuts: Vec<&Scalar> = Vec::with_capacity(2 * (self.pieces.len() + other.pieces.len()));
        for (iv, _) in self.pieces.iter().chain(other.pieces.iter()) {
            cuts.push(iv.lo());
            cuts.push(iv.hi());
        }
        cuts.sort();
        cuts.dedup();
        let zero = Scalar::zero();
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            while i < self.pieces.len() && self.pieces[i].0.hi() <= lo {
                i += 1;
            }
            while j < other.pieces.len() && other.pieces[j].0.hi() <= lo {
                j += 1;
            }
            let a = match self.pieces.get(i) {
                Some((iv, v)) if iv.lo() <= lo => v,
                _ => &zero,
            };
            let b = match other.pieces.get(j) {
                Some((iv, v)) if iv.lo() <= lo => v,
                _ => &zero,
            };
            let v = op(a, b);
            if !v.is_zero() {
                out.push((Interval::raw(lo.clone(), hi.clone()), v));
            }
        }
        StepFunction::from_sorted(out)
    }

    pub fn add(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &StepFunction) -> StepFunction {
        self.combine(other, |a, b| a * b)
    }

    /// `f · 1_set`.
    pub fn restrict(&self, set: &IntervalSet) -> StepFunction {
        let mut out = Vec::new();
        for iv in set.intervals() {
            let start = self.pieces.partition_point(|(p, _)| p.hi() <= iv.lo());
            for (p, v) in &self.pieces[start..] {
                if p.lo() >= iv.hi() {
                    break;
                }
                if let Some(c) = p.intersect(iv) {
                    out.push((c, v.clone()));
                }
            }
        }
        StepFunction::from_sorted(out)
    }

    /// `f∘T` on the domain of `T`, zero elsewhere.
    ///
    /// The support of `f` must lie in the image of `T`, otherwise mass of `f`
    /// would silently disappear.
    pub fn pullback(&self, t: &PiecewiseTranslation) -> Result<StepFunction, Error> {
        let lost = self.support().difference(&t.image());
        if !lost.is_empty() {
            return Err(Error::DomainMismatch(format!(
                "support of f is not covered by the image of T (uncovered: {lost})"
            )));
        }
        Ok(self.pullback_partial(t))
    }

    /// `f∘T` on the domain of `T`, ignoring any support of `f` outside the image.
    pub fn pullback_partial(&self, t: &PiecewiseTranslation) -> StepFunction {
        let mut out = Vec::new();
        for b in t.branches() {
            let d = b.offset();
            let img = b.image();
            let start = self.pieces.partition_point(|(iv, _)| iv.hi() <= img.lo());
            for (iv, v) in &self.pieces[start..] {
                if iv.lo() >= img.hi() {
                    break;
                }
                if let Some(c) = iv.intersect(&img) {
                    out.push((Interval::raw(c.lo() - d, c.hi() - d), v.clone()));
                }
            }
        }
        StepFunction::from_sorted(out)
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    lo: String,
    hi: String,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionJson {
    pieces: Vec<PieceJson>,
}

impl TryFrom<StepFunctionJson> for StepFunction {
    type Error = Error;
    fn try_from(j: StepFunctionJson) -> Result<Self, Error> {
        let mut v = Vec::with_capacity(j.pieces.len());
        for p in j.pieces {
            let iv = Interval::new(scalar::parse(&p.lo)?, scalar::parse(&p.hi)?)?;
            v.push((iv, scalar::parse(&p.value)?));
        }
        StepFunction::from_pieces(v)
    }
}

impl From<StepFunction> for StepFunctionJson {
    fn from(f: StepFunction) -> Self {
        StepFunctionJson {
            pieces: f
                .pieces
                .into_iter()
                .map(|(iv, v)| PieceJson {
                    lo: scalar::format(iv.lo()),
                    hi: scalar::format(iv.hi()),
                    value: scalar::format(&v),
                })
                .collect(),
        }
    }
}
