use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::Error;

/// Rokhlin-type tower: disjoint equal-measure levels `I_1..I_h` and a map
/// carrying each level onto the next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TowerJson", into = "TowerJson")]
pub struct Tower {
    levels: Vec<IntervalSet>,
    map: PiecewiseTranslation,
}

impl Tower {
    pub fn new(levels: Vec<IntervalSet>, map: PiecewiseTranslation) -> Result<Self, Error> {
        let t = Tower { levels, map };
        t.validate()?;
        Ok(t)
    }

    /// Stacks the given levels with the increasing (order-preserving) map
    /// between consecutive levels.
    pub fn stack(levels: Vec<IntervalSet>) -> Result<Self, Error> {
        let mut branches = Vec::new();
        for w in levels.windows(2) {
            let m = PiecewiseTranslation::order_preserving(&w[0], &w[1])?;
            branches.extend(m.branches().iter().cloned());
        }
        Tower::new(levels, PiecewiseTranslation::new(branches)?)
    }

    fn validate(&self) -> Result<(), Error> {
        let bad = |m: String| Err(Error::InvalidInput(format!("tower: {m}")));
        let Some(base) = self.levels.first() else {
            return bad("height must be at least 1".into());
        };
        let w = base.measure();
        if w.is_zero() {
            return bad("levels must have positive measure".into());
        }
        for (i, l) in self.levels.iter().enumerate() {
            if l.measure() != w {
                return bad(format!("level {} has measure {}, base has {}", i + 1, scalar::format(&l.measure()), scalar::format(&w)));
            }
        }
        let mut all: Vec<_> = self.levels.iter().flat_map(|l| l.intervals().iter()).collect();
        all.sort_by(|a, b| a.lo().cmp(b.lo()));
        if all.windows(2).any(|p| p[0].hi() > p[1].lo()) {
            return bad("levels overlap".into());
        }
        let h = self.levels.len();
        let below_top = IntervalSet::union_all(self.levels[..h - 1].iter());
        if self.map.domain() != below_top {
            return bad("map domain must be exactly the levels below the top".into());
        }
        for i in 0..h - 1 {
            if self.map.image_of(&self.levels[i]) != self.levels[i + 1] {
                return bad(format!("map does not carry level {} onto level {}", i + 1, i + 2));
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[IntervalSet] {
        &self.levels
    }

    pub fn base(&self) -> &IntervalSet {
        &self.levels[0]
    }

    pub fn top(&self) -> &IntervalSet {
        &self.levels[self.levels.len() - 1]
    }

    /// Common measure of the levels.
    pub fn width(&self) -> Scalar {
        self.levels[0].measure()
    }

    pub fn support(&self) -> IntervalSet {
        IntervalSet::union_all(self.levels.iter())
    }

    pub fn map(&self) -> &PiecewiseTranslation {
        &self.map
    }

    /// `Φ_i : I_1 → I_{i+1}`, the composite of the level maps, for `i = 0..h`.
    pub fn climb(&self) -> Vec<PiecewiseTranslation> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut cur = PiecewiseTranslation::identity(self.base());
        for _ in 1..self.levels.len() {
            let next = self.map.compose_partial(&cur);
            out.push(cur);
            cur = next;
        }
        out.push(cur);
        out
    }

    /// Running sums `R_k(x) = Σ_{i≤k} f(τ^i x)` on the base, for `k = 0..h`.
    /// Computed exactly on the common refinement of all composite maps.
    pub fn running_sums(&self, f: &StepFunction) -> Vec<StepFunction> {
        let mut out = Vec::with_capacity(self.levels.len());
        let mut acc = StepFunction::zero();
        for phi in self.climb() {
            acc = acc.add(&f.restrict(&phi.image()).pullback_partial(&phi));
            out.push(acc.clone());
        }
        out
    }

    /// `Σ_{i<h} f(τ^i x)` on the base.
    pub fn full_sum(&self, f: &StepFunction) -> StepFunction {
        self.running_sums(f).pop().unwrap_or_default()
    }

    /// Exhaustive audit of the running and full sums of `f` over the tower.
    pub fn audit(&self, f: &StepFunction) -> TowerAudit {
        let sums = self.running_sums(f);
        let base = self.base();
        let mut max_running = Scalar::zero();
        for s in &sums {
            let (lo, hi) = range_on(s, base);
            max_running = scalar::max(&max_running, &scalar::max(&scalar::abs(&lo), &scalar::abs(&hi)));
        }
        let (flo, fhi) = range_on(sums.last().expect("nonempty"), base);
        let max_level_osc = self
            .levels
            .iter()
            .map(|l| {
                let (a, b) = range_on(f, l);
                b - a
            })
            .max()
            .unwrap_or_else(Scalar::zero);
        TowerAudit {
            max_abs_running_sum: max_running,
            max_abs_full_sum: scalar::max(&scalar::abs(&flo), &scalar::abs(&fhi)),
            full_sum_constant: flo == fhi,
            max_level_oscillation: max_level_osc,
        }
    }
}

/// Results of walking every refined branch of a tower.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerAudit {
    pub max_abs_running_sum: Scalar,
    pub max_abs_full_sum: Scalar,
    pub full_sum_constant: bool,
    pub max_level_oscillation: Scalar,
}

impl TowerAudit {
    /// The TUB running-sum and full-sum conditions for tolerance `eps`.
    pub fn is_tub(&self, sup_f: &Scalar, eps: &Scalar) -> bool {
        self.max_abs_running_sum < sup_f + eps && &self.max_abs_full_sum < eps
    }
}

/// Essential range `(min, max)` of `f` on a set of positive measure.
pub fn range_on(f: &StepFunction, set: &IntervalSet) -> (Scalar, Scalar) {
    let r = f.restrict(set);
    let mut vals: Vec<Scalar> = r.pieces().iter().map(|(_, v)| v.clone()).collect();
    if r.support().measure() < set.measure() {
        vals.push(Scalar::zero());
    }
    let lo = vals.iter().min().cloned().unwrap_or_default();
    let hi = vals.iter().max().cloned().unwrap_or_default();
    (lo, hi)
}

#[derive(Serialize, Deserialize)]
struct TowerJson {
    height: usize,
    levels: Vec<IntervalSet>,
    map: PiecewiseTranslation,
}

impl TryFrom<TowerJson> for Tower {
    type Error = Error;
    fn try_from(j: TowerJson) -> Result<Self, Error> {
        if j.height != j.levels.len() {
            return Err(Error::Parse(format!("height {} but {} levels", j.height, j.levels.len())));
        }
        Tower::new(j.levels, j.map)
    }
}

impl From<Tower> for TowerJson {
    fn from(t: Tower) -> Self {
        TowerJson {
            height: t.levels.len(),
            levels: t.levels,
            map: t.map,
        }
    }
}
