use num_traits::{Signed, Zero};

use crate::measure::{IntervalSet, StepFunction};
use crate::scalar::{self, Scalar};
use crate::towers::pub_partition::level_sets;
use crate::towers::tower::Tower;
use crate::towers::two_step::build_two_step_towers;
use crate::Error;

/// Disjoint carriers, each with the restriction of `f` to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub parts: Vec<(IntervalSet, StepFunction)>,
}

impl Decomposition {
    pub fn carriers(&self) -> impl Iterator<Item = &IntervalSet> {
        self.parts.iter().map(|(c, _)| c)
    }
}

/// Splits a mean-zero step function into mean-zero pieces taking at most two
/// values.
///
/// Repeatedly takes the level set `I_j` of least mass `|a_j| μ(I_j)` (lowest
/// index on ties, values ascending) and pairs it with the front of the first
/// level set of opposite sign, cut to cancel it exactly. Each round removes at
/// least one level set, so there are fewer parts than nonzero values.
pub fn decompose_two_value(f: &StepFunction) -> Result<Decomposition, Error> {
    let total = f.integral_total();
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let mut sets: Vec<(Scalar, IntervalSet)> = level_sets(f, &f.support());
    let mut parts = Vec::new();
    while !sets.is_empty() {
        let mass = |(v, s): &(Scalar, IntervalSet)| scalar::abs(v) * s.measure();
        let j = (0..sets.len()).min_by(|&x, &y| mass(&sets[x]).cmp(&mass(&sets[y])).then(x.cmp(&y))).expect("nonempty");
        let sign = sets[j].0.is_positive();
        let k = (0..sets.len())
            .find(|&i| sets[i].0.is_positive() != sign)
            .ok_or_else(|| Error::ConstructionFailed("no level set of opposite sign".into()))?;
        let need = mass(&sets[j]) / scalar::abs(&sets[k].0);
        let (front, back) = sets[k].1.split_at_measure(&need);
        let carrier = sets[j].1.union(&front);
        parts.push((carrier.clone(), f.restrict(&carrier)));
        sets[k].1 = back;
        let k_empty = sets[k].1.is_empty();
        let (lo, hi) = if j < k { (j, k) } else { (k, j) };
        if k_empty {
            sets.remove(hi);
            sets.remove(lo);
        } else {
            sets.remove(j);
        }
    }
    Ok(Decomposition { parts })
}

/// Towers covering the support of `f`: each two-valued part gets a pair of
/// towers with tolerance `epsilons[i]`. `f = 0` gives no towers.
pub fn decompose_bounded(f: &StepFunction, epsilons: &[Scalar]) -> Result<Vec<Tower>, Error> {
    let d = decompose_two_value(f)?;
    if epsilons.len() < d.parts.len() {
        return Err(Error::InvalidInput(format!(
            "{} tolerances for {} parts",
            epsilons.len(),
            d.parts.len()
        )));
    }
    let mut out = Vec::with_capacity(2 * d.parts.len());
    for ((carrier, g), eps) in d.parts.iter().zip(epsilons) {
        let pair = build_two_step_towers(g, carrier, 1, eps)?;
        out.extend(pair.towers);
    }
    Ok(out)
}
