use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::measure::IntervalSet;
use crate::scalar::{self, Scalar};
use crate::Error;

/// Orders cells so that the running integral stays small: while the sum so
/// far is `≤ 0` the next cell has nonnegative integral, otherwise negative.
/// Among eligible cells the lowest index wins.
///
/// Every prefix sum is then bounded in absolute value by the largest single
/// cell integral.
pub fn greedy_stack(cells: &[(IntervalSet, Scalar)]) -> Result<Vec<usize>, Error> {
    let total: Scalar = cells.iter().map(|(_, v)| v.clone()).sum();
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let mut nonneg: BTreeSet<usize> = BTreeSet::new();
    let mut neg: BTreeSet<usize> = BTreeSet::new();
    for (i, (_, v)) in cells.iter().enumerate() {
        if v.is_negative() {
            neg.insert(i);
        } else {
            nonneg.insert(i);
        }
    }
    let mut sigma = Scalar::zero();
    let mut order = Vec::with_capacity(cells.len());
    while order.len() < cells.len() {
        let pool = if sigma <= Scalar::zero() { &mut nonneg } else { &mut neg };
        let next = pool
            .pop_first()
            .ok_or_else(|| Error::ConstructionFailed("greedy stacking ran out of eligible cells".into()))?;
        sigma += &cells[next].1;
        order.push(next);
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn run(vals: &[i64]) -> Vec<usize> {
        let cells: Vec<_> = vals.iter().map(|&v| (IntervalSet::empty(), int(v))).collect();
        greedy_stack(&cells).unwrap()
    }

    #[test]
    fn hand_traces() {
        assert_eq!(run(&[1, -1]), vec![0, 1]);
        assert_eq!(run(&[2, -1, -1]), vec![0, 1, 2]);
        assert_eq!(run(&[-1, -1, 1, 1]), vec![2, 0, 3, 1]);
    }

    #[test]
    fn rejects_unbalanced() {
        let cells = vec![(IntervalSet::empty(), int(1))];
        assert!(matches!(greedy_stack(&cells), Err(Error::UnbalancedInput(_))));
    }
}
