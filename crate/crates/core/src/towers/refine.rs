use std::collections::BTreeMap;

use num_traits::Zero;

use crate::measure::{Branch, IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::towers::pub_partition::level_sets;
use crate::towers::tower::Tower;
use crate::Error;

/// Number of quantization steps per unit: the least integer `k > 3h/ε`.
pub fn quantization_steps(height: usize, epsilon: &Scalar) -> Scalar {
    let bound = Scalar::from_integer((3 * height).into()) / epsilon;
    Scalar::from_integer(scalar::floor_plus_one(&bound))
}

/// Rebuilds the level maps of `tower` so that partial sums of `f` along
/// different orbits stay within `ε` of each other.
///
/// `f` is quantized to multiples of `1/k`. Walking up the tower, base points
/// are grouped into strands by their quantized partial sum; strands are taken
/// in decreasing order of that sum and matched, by measure, against the next
/// level sorted by increasing quantized value. Ties keep positional order.
pub fn refine_levels(tower: &Tower, f: &StepFunction, epsilon: &Scalar) -> Result<Tower, Error> {
    if epsilon <= &Scalar::zero() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let k = quantization_steps(tower.height(), epsilon);
    let quantized = f.map_values(|v| (v * &k).floor() / &k);
    let classes = |level: &IntervalSet| level_sets(&quantized, level);

    // (partial sum, set of points at the current level)
    let mut strands: Vec<(Scalar, IntervalSet)> = classes(tower.base());
    let mut branches: Vec<Branch> = Vec::new();
    for level in &tower.levels()[1..] {
        strands.sort_by(|a, b| b.0.cmp(&a.0));
        let next = classes(level);
        let mut grown: BTreeMap<Scalar, Vec<IntervalSet>> = BTreeMap::new();
        let (mut si, mut ci) = (0, 0);
        let (mut spos, mut cpos) = (Scalar::zero(), Scalar::zero());
        while si < strands.len() && ci < next.len() {
            let (g, src) = &strands[si];
            let (v, dst) = &next[ci];
            let (smeas, cmeas) = (src.measure(), dst.measure());
            let len = scalar::min(&(&smeas - &spos), &(&cmeas - &cpos));
            let from = src.slice_by_measure(&spos, &(&spos + &len));
            let to = dst.slice_by_measure(&cpos, &(&cpos + &len));
            let m = PiecewiseTranslation::order_preserving(&from, &to)?;
            branches.extend(m.branches().iter().cloned());
            grown.entry(g + v).or_default().push(to);
            spos += &len;
            cpos += &len;
            if spos == smeas {
                si += 1;
                spos = Scalar::zero();
            }
            if cpos == cmeas {
                ci += 1;
                cpos = Scalar::zero();
            }
        }
        strands = grown
            .into_iter()
            .map(|(g, sets)| (g, IntervalSet::union_all(sets.iter())))
            .collect();
    }
    Tower::new(tower.levels().to_vec(), PiecewiseTranslation::new(branches)?)
}

/// Largest gap between the partial sums of `f` over two base points, taken
/// over all heights `m ≤ h`. Exhaustive over the refined branches.
pub fn max_partial_sum_spread(tower: &Tower, f: &StepFunction) -> Scalar {
    let base = tower.base();
    tower
        .running_sums(f)
        .iter()
        .map(|s| {
            let (lo, hi) = crate::towers::tower::range_on(s, base);
            hi - lo
        })
        .max()
        .unwrap_or_else(Scalar::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Interval;
    use crate::scalar::{int, ratio};

    fn set(a: i64, b: i64, d: i64) -> IntervalSet {
        IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
    }

    #[test]
    fn k_is_least_integer_above_bound() {
        assert_eq!(quantization_steps(2, &ratio(1, 2)), int(13));
        assert_eq!(quantization_steps(3, &ratio(1, 10)), int(91));
    }

    #[test]
    fn constant_levels_keep_the_map() {
        let t = Tower::stack(vec![set(0, 1, 3), set(1, 2, 3), set(2, 3, 3)]).unwrap();
        let f = StepFunction::from_sets([(set(0, 1, 3), int(1)), (set(1, 3, 3), ratio(-1, 2))]).unwrap();
        let r = refine_levels(&t, &f, &ratio(1, 10)).unwrap();
        assert_eq!(r, t);
        assert_eq!(max_partial_sum_spread(&r, &f), int(0));
    }

    #[test]
    fn opposite_orderings_are_paired() {
        // Level 1: 0 then 1/2; level 2: 0 then 1/2. The stacked map pairs equal values.
        let t = Tower::stack(vec![set(0, 2, 4), set(2, 4, 4)]).unwrap();
        let f = StepFunction::from_sets([(set(1, 2, 4), ratio(1, 2)), (set(3, 4, 4), ratio(1, 2))]).unwrap();
        assert_eq!(max_partial_sum_spread(&t, &f), int(1));
        let r = refine_levels(&t, &f, &ratio(1, 2)).unwrap();
        // Large base values now meet small second-level values.
        assert_eq!(r.map().apply(&ratio(3, 8)).unwrap(), ratio(5, 8));
        assert_eq!(r.map().apply(&ratio(1, 8)).unwrap(), ratio(7, 8));
        assert_eq!(max_partial_sum_spread(&r, &f), ratio(1, 2));
        let sums = r.running_sums(&f);
        assert_eq!(sums[1], StepFunction::constant_on(&set(0, 2, 4), ratio(1, 2)));
    }
}
