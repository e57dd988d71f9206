use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::measure::{Interval, IntervalSet, StepFunction};
use crate::scalar::{self, Scalar};
use crate::towers::tower::range_on;
use crate::Error;

/// Default cap on the number of equal cells a partition may use.
pub const DEFAULT_MAX_CELLS: usize = 1_000_000;

/// Balanced uniform partition of a set `A`: equal-measure cells on which `f`
/// barely oscillates, plus a small exceptional set `E` carrying the same mean.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PubPartition {
    pub cells: Vec<IntervalSet>,
    pub exceptional: IntervalSet,
    pub epsilon: Scalar,
    /// Cells have measure `μ(A)/n`.
    pub n: u64,
}

impl PubPartition {
    pub fn cell_measure(&self) -> Scalar {
        self.cells.first().map(IntervalSet::measure).unwrap_or_default()
    }

    /// Checks the four defining conditions exactly; returns the first failure.
    pub fn check(&self, f: &StepFunction, a: &IntervalSet) -> Result<(), String> {
        let mut all: Vec<&Interval> = self.cells.iter().flat_map(|c| c.intervals()).collect();
        all.extend(self.exceptional.intervals());
        all.sort_by(|x, y| x.lo().cmp(y.lo()));
        if all.windows(2).any(|w| w[0].hi() > w[1].lo()) {
            return Err("cells overlap".into());
        }
        let union = IntervalSet::from_intervals(all.into_iter().cloned());
        if &union != a {
            return Err("cells and exceptional set do not partition A".into());
        }
        let ma = a.measure();
        if self.exceptional.measure() >= &self.epsilon * &ma {
            return Err(format!("μ(E) = {} is not below ε·μ(A)", scalar::format(&self.exceptional.measure())));
        }
        let rest = a.difference(&self.exceptional);
        if f.integral(&rest) * &ma != rest.measure() * f.integral(a) {
            return Err("balance identity fails".into());
        }
        let w = self.cell_measure();
        for c in &self.cells {
            if c.measure() != w {
                return Err("cells have unequal measure".into());
            }
            let (lo, hi) = range_on(f, c);
            if hi - lo >= self.epsilon {
                return Err("oscillation on a cell is not below ε".into());
            }
        }
        Ok(())
    }
}

/// How the number of cells is chosen.
#[derive(Clone, Copy, Debug)]
pub(crate) enum CellRule<'a> {
    /// `n = q + 1` with `q` the least multiple of the ratio denominator for
    /// which `μ(E) = μ(A)/n < ε·μ(A)`; each bin gives up its last `1/n`.
    Shift { epsilon: &'a Scalar },
    /// `n = q`, the least multiple of the ratio denominator above `above`; no exceptional set.
    Exact { above: u64 },
}

/// Equal-measure cells cut from a list of bins.
#[derive(Clone, Debug)]
pub(crate) struct EqualCells {
    pub n: u64,
    pub width: Scalar,
    /// Cells of each bin, in positional order.
    pub cells: Vec<Vec<IntervalSet>>,
    /// What is left of each bin (empty under the exact rule).
    pub remainders: Vec<IntervalSet>,
}

fn ceil_multiple(l: &BigInt, at_least: &BigInt) -> BigInt {
    let m = at_least.div_ceil(l);
    l * if m < BigInt::one() { BigInt::one() } else { m }
}

pub(crate) fn equal_cells(bins: &[IntervalSet], rule: CellRule<'_>, max_cells: usize) -> Result<EqualCells, Error> {
    let total: Scalar = bins.iter().map(IntervalSet::measure).sum();
    if total.is_zero() {
        return Err(Error::DegenerateInput("set has measure zero".into()));
    }
    let ratios: Vec<Scalar> = bins.iter().map(|b| b.measure() / &total).collect();
    let l = scalar::lcm_of_denominators(&ratios);
    let (q, n) = match rule {
        CellRule::Shift { epsilon } => {
            let need = scalar::floor_plus_one(&(epsilon.recip() - Scalar::one()));
            let q = ceil_multiple(&l, &need);
            let n = &q + 1;
            (q, n)
        }
        CellRule::Exact { above } => {
            let q = ceil_multiple(&l, &(BigInt::from(above) + 1));
            (q.clone(), q)
        }
    };
    if q.to_usize().is_none_or(|c| c > max_cells) {
        return Err(Error::BranchLimit {
            limit: max_cells,
            count: q.to_usize().unwrap_or(usize::MAX),
        });
    }
    let width = &total / Scalar::from_integer(n.clone());
    let mut cells = Vec::with_capacity(bins.len());
    let mut remainders = Vec::with_capacity(bins.len());
    for (bin, r) in bins.iter().zip(&ratios) {
        let p = (r * Scalar::from_integer(q.clone())).to_integer().to_usize().expect("bounded by q");
        let mut parts = bin.cut(&vec![width.clone(); p]);
        remainders.push(parts.pop().expect("cut returns the leftover"));
        cells.push(parts);
    }
    Ok(EqualCells {
        n: n.to_u64().expect("bounded by max_cells"),
        width,
        cells,
        remainders,
    })
}

/// Level sets of `f` inside `a`, ascending by value, including the zero set.
pub fn level_sets(f: &StepFunction, a: &IntervalSet) -> Vec<(Scalar, IntervalSet)> {
    let r = f.restrict(a);
    let mut by_value: BTreeMap<Scalar, Vec<Interval>> = BTreeMap::new();
    for (iv, v) in r.pieces() {
        by_value.entry(v.clone()).or_default().push(iv.clone());
    }
    let zero = a.difference(&r.support());
    let mut out: Vec<(Scalar, IntervalSet)> = by_value
        .into_iter()
        .map(|(v, ivs)| (v, IntervalSet::from_intervals(ivs)))
        .collect();
    if !zero.is_empty() {
        out.push((Scalar::zero(), zero));
        out.sort_by(|x, y| x.0.cmp(&y.0));
    }
    out
}

fn check_domain(a: &IntervalSet) -> Result<(), Error> {
    if a.measure().is_zero() {
        return Err(Error::DegenerateInput("μ(A) = 0".into()));
    }
    Ok(())
}

/// PUB(ε) partition of `a` for `f`. Cells lie inside level sets of `f`, so the
/// oscillation on each cell is zero; the exceptional set takes the last
/// `1/n` of every level set, which makes the balance identity exact.
pub fn build_pub_partition(f: &StepFunction, a: &IntervalSet, epsilon: &Scalar) -> Result<PubPartition, Error> {
    check_domain(a)?;
    if epsilon <= &Scalar::zero() || epsilon >= &Scalar::one() {
        return Err(Error::InvalidInput(format!("ε = {} must lie in (0, 1)", scalar::format(epsilon))));
    }
    if f.restrict(a).is_zero() {
        return Ok(PubPartition {
            cells: vec![a.clone()],
            exceptional: IntervalSet::empty(),
            epsilon: epsilon.clone(),
            n: 1,
        });
    }
    let bins: Vec<IntervalSet> = level_sets(f, a).into_iter().map(|(_, s)| s).collect();
    let ec = equal_cells(&bins, CellRule::Shift { epsilon }, DEFAULT_MAX_CELLS)?;
    Ok(PubPartition {
        cells: ec.cells.into_iter().flatten().collect(),
        exceptional: IntervalSet::union_all(ec.remainders.iter()),
        epsilon: epsilon.clone(),
        n: ec.n,
    })
}

/// Variant with an empty exceptional set: the level sets of `f` (refined by
/// the partition `q`) are cut into more than `above` cells of measure `μ(A)/n`.
/// Only possible because rational measures make the Diophantine step exact.
pub fn build_pub_partition_exact(
    f: &StepFunction,
    a: &IntervalSet,
    epsilon: &Scalar,
    q: &[IntervalSet],
    above: u64,
) -> Result<PubPartition, Error> {
    check_domain(a)?;
    let bins = refined_bins(f, a, q);
    let ec = equal_cells(&bins, CellRule::Exact { above }, DEFAULT_MAX_CELLS)?;
    Ok(PubPartition {
        cells: ec.cells.into_iter().flatten().collect(),
        exceptional: IntervalSet::empty(),
        epsilon: epsilon.clone(),
        n: ec.n,
    })
}

/// Level sets of `f` in `a`, each split along the sets of `q` (and the part of `a` outside all of them).
pub(crate) fn refined_bins(f: &StepFunction, a: &IntervalSet, q: &[IntervalSet]) -> Vec<IntervalSet> {
    let covered = IntervalSet::union_all(q.iter());
    let mut out = Vec::new();
    for (_, s) in level_sets(f, a) {
        for part in q {
            let x = s.intersection(part);
            if !x.is_empty() {
                out.push(x);
            }
        }
        let rest = s.difference(&covered);
        if !rest.is_empty() {
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn set(a: i64, b: i64, d: i64) -> IntervalSet {
        IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
    }

    #[test]
    fn zero_function_gives_one_cell() {
        let p = build_pub_partition(&StepFunction::zero(), &IntervalSet::unit(), &ratio(1, 2)).unwrap();
        assert_eq!(p.cells, vec![IntervalSet::unit()]);
        assert!(p.exceptional.is_empty());
    }

    #[test]
    fn halves_at_quarter() {
        let f = StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap();
        let a = IntervalSet::unit();
        let p = build_pub_partition(&f, &a, &ratio(1, 4)).unwrap();
        p.check(&f, &a).unwrap();
        // q = 4 is the least even number with q + 1 > 4.
        assert_eq!(p.n, 5);
        assert_eq!(p.cells.len(), 4);
        assert_eq!(p.exceptional.measure(), ratio(1, 5));
        assert_eq!(f.integral(&p.exceptional), int(0));
        let e = build_pub_partition_exact(&f, &a, &ratio(1, 4), &[], 1).unwrap();
        assert_eq!(e.cells.len(), 2);
        assert!(e.exceptional.is_empty());
        e.check(&f, &a).unwrap();
    }

    #[test]
    fn three_bins() {
        // μ(A_i) = 1/3, 1/6, 1/2: ratio denominator 6.
        let f = StepFunction::from_sets([(set(0, 2, 6), int(1)), (set(2, 3, 6), int(2)), (set(3, 6, 6), int(-1))]).unwrap();
        let a = IntervalSet::unit();
        let p = build_pub_partition(&f, &a, &ratio(1, 6)).unwrap();
        assert_eq!(p.n, 7);
        assert_eq!(p.cell_measure(), ratio(1, 7));
        p.check(&f, &a).unwrap();
        let p = build_pub_partition(&f, &a, &ratio(1, 10)).unwrap();
        assert_eq!(p.n, 13);
        p.check(&f, &a).unwrap();
    }

    #[test]
    fn degenerate_domain() {
        assert!(matches!(
            build_pub_partition(&StepFunction::zero(), &IntervalSet::empty(), &ratio(1, 2)),
            Err(Error::DegenerateInput(_))
        ));
    }
}
