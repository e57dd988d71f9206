use num_traits::Zero;

use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::towers::greedy::greedy_stack;
use crate::towers::pub_partition::{equal_cells, refined_bins, CellRule, DEFAULT_MAX_CELLS};
use crate::towers::tower::Tower;
use crate::Error;

/// Balanced uniform tower for a mean-zero `f` on `a`.
///
/// The level sets of `f`, split along `q`, are cut into `n > min_height`
/// cells of equal measure with no exceptional set. Each cell sits inside one
/// level set and one part of `q`, so `f` is constant on every level and every
/// part of `q` is an exact union of levels. Cells are stacked greedily.
/// Since `f` is constant on levels the partial sums agree across the base and
/// no level refinement is needed; running sums stay within `‖f‖∞` and the
/// full sum is exactly zero.
pub fn build_tub_tower(
    f: &StepFunction,
    a: &IntervalSet,
    epsilon: &Scalar,
    min_height: usize,
    q: &[IntervalSet],
) -> Result<Tower, Error> {
    if a.measure().is_zero() {
        return Err(Error::DegenerateInput("μ(A) = 0".into()));
    }
    if epsilon <= &Scalar::zero() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let total = f.integral(a);
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let local = f.restrict(a);
    if local.is_zero() {
        return Tower::new(vec![a.clone()], PiecewiseTranslation::new([])?);
    }
    let bins = refined_bins(&local, a, q);
    let ec = equal_cells(&bins, CellRule::Exact { above: min_height as u64 }, DEFAULT_MAX_CELLS)?;
    let mut cells = Vec::new();
    for (bin, parts) in bins.iter().zip(ec.cells) {
        let value = local.integral(bin) / bin.measure();
        for c in parts {
            cells.push((c, &value * &ec.width));
        }
    }
    let order = greedy_stack(&cells)?;
    let levels = order.into_iter().map(|i| cells[i].0.clone()).collect();
    Tower::stack(levels)
}
