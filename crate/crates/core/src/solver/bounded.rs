use num_traits::Zero;

use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::solver::verify::{verify, SolutionCertificate};
use crate::towers::{equal_cells, greedy_stack, level_sets, CellRule, Tower};
use crate::Error;

/// Default cap on branches of any stage map.
pub const DEFAULT_MAX_BRANCHES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedOptions {
    /// Close the last stage exactly (no residual) instead of running one more
    /// balanced stage.
    pub exact_final: bool,
    pub max_branches: usize,
}

impl Default for BoundedOptions {
    fn default() -> Self {
        BoundedOptions {
            exact_final: true,
            max_branches: DEFAULT_MAX_BRANCHES,
        }
    }
}

/// Snapshot after one stage of cutting and stacking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageState {
    pub stage_index: usize,
    /// `S_n`: every column climbed, every top sent back to its base.
    pub transformation: PiecewiseTranslation,
    /// Where `f = g_n − g_n∘S_n` may fail: tops of columns whose sum is not zero.
    pub residual: IntervalSet,
    /// `β_n`: bounds `μ(residual)` and the measure where `S_{n+1}` differs from `S_n`.
    pub residual_measure_bound: Scalar,
    pub transfer: StepFunction,
    /// Towers stacked during this stage.
    pub towers: Vec<Tower>,
    /// Bottom-to-top sums of `f` on the column bases.
    pub induced: StepFunction,
    pub epsilon: Scalar,
    /// Union of the top levels of all columns.
    pub tops: IntervalSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedSolution {
    pub certificate: SolutionCertificate,
    pub stages: Vec<StageState>,
}

impl BoundedSolution {
    pub fn beta_sum(&self) -> Scalar {
        self.stages.iter().map(|s| s.residual_measure_bound.clone()).sum()
    }
}

/// A tower with `f` constant on each level. Level maps are implicit: each
/// level is carried onto the next in order.
#[derive(Clone, Debug)]
struct Column {
    levels: Vec<IntervalSet>,
    values: Vec<Scalar>,
}

impl Column {
    fn base(&self) -> &IntervalSet {
        &self.levels[0]
    }

    fn top(&self) -> &IntervalSet {
        self.levels.last().expect("nonempty column")
    }

    fn full_sum(&self) -> Scalar {
        self.values.iter().sum()
    }

    /// Sub-column over the base positions `[a, b)`.
    fn slice(&self, a: &Scalar, b: &Scalar) -> Column {
        Column {
            levels: self.levels.iter().map(|l| l.slice_by_measure(a, b)).collect(),
            values: self.values.clone(),
        }
    }

    fn append(&mut self, other: Column) {
        self.levels.extend(other.levels);
        self.values.extend(other.values);
    }

    fn tower(&self) -> Result<Tower, Error> {
        Tower::stack(self.levels.clone())
    }
}

/// Tolerance of stage `n`: `δ/2^{n+1}`, kept below one half.
pub fn stage_epsilon(delta: &Scalar, n: usize) -> Scalar {
    scalar::min(&(delta / scalar::pow2(n as u64 + 1)), &scalar::ratio(1, 2))
}

/// Cuts `cols` into equal sub-columns and stacks them greedily by their sums.
/// Returns the new column and whatever the cell rule left of each column.
fn restack(cols: Vec<Column>, rule: CellRule<'_>, max: usize) -> Result<(Column, Vec<Column>), Error> {
    let bases: Vec<IntervalSet> = cols.iter().map(|c| c.base().clone()).collect();
    let ec = equal_cells(&bases, rule, max)?;
    let w = ec.width;
    let mut cells = Vec::new();
    let mut index = Vec::new();
    for (i, parts) in ec.cells.iter().enumerate() {
        let integral = cols[i].full_sum() * &w;
        for (k, part) in parts.iter().enumerate() {
            cells.push((part.clone(), integral.clone()));
            index.push((i, k));
        }
    }
    if cells.len() > max {
        return Err(Error::BranchLimit {
            limit: max,
            count: cells.len(),
        });
    }
    let order = greedy_stack(&cells)?;
    let mut stacked: Option<Column> = None;
    for o in order {
        let (i, k) = index[o];
        let lo = Scalar::from_integer(k.into()) * &w;
        let sub = cols[i].slice(&lo, &(&lo + &w));
        match stacked.as_mut() {
            Some(c) => c.append(sub),
            None => stacked = Some(sub),
        }
    }
    let mut rest = Vec::new();
    for (i, parts) in ec.cells.iter().enumerate() {
        let used = Scalar::from_integer(parts.len().into()) * &w;
        let m = cols[i].base().measure();
        if used < m {
            rest.push(cols[i].slice(&used, &m));
        }
    }
    Ok((stacked.expect("at least one cell"), rest))
}

fn closed_map(cols: &[Column], max: usize) -> Result<PiecewiseTranslation, Error> {
    let mut branches = Vec::new();
    for c in cols {
        let n = c.levels.len();
        for j in 0..n {
            let next = &c.levels[(j + 1) % n];
            let m = PiecewiseTranslation::order_preserving(&c.levels[j], next)?;
            branches.extend(m.branches().iter().cloned());
        }
        if branches.len() > max {
            return Err(Error::BranchLimit {
                limit: max,
                count: branches.len(),
            });
        }
    }
    PiecewiseTranslation::new(branches)
}

/// `g = −(sum of f over the levels below)`, so `g − g∘S = f` off the tops
/// of columns with nonzero sum.
fn transfer(cols: &[Column]) -> Result<StepFunction, Error> {
    let mut pieces = Vec::new();
    for c in cols {
        let mut below = Scalar::zero();
        for (l, v) in c.levels.iter().zip(&c.values) {
            if !below.is_zero() {
                pieces.push((l.clone(), -below.clone()));
            }
            below += v;
        }
    }
    StepFunction::from_sets(pieces)
}

/// Bounded transfer function on `[0, 1)`; see [`construct_bounded_on`].
pub fn construct_bounded_solution(f: &StepFunction, delta: &Scalar, stages: usize) -> Result<BoundedSolution, Error> {
    construct_bounded_on(f, &IntervalSet::unit(), delta, stages, &BoundedOptions::default())
}

/// Builds `S_1, …, S_N` on `a` by cutting and stacking, with transfer
/// functions bounded by `‖f‖∞`.
///
/// Stage 0 is the level sets of `f` as height-one columns. Each stage cuts
/// every column base into equal cells, leaving the last part of each column
/// aside, and stacks the cells greedily by column sum; columns summing to
/// zero go first. The last stage instead closes zero-sum columns and stacks
/// the rest with no remainder, so its map solves the equation exactly.
pub fn construct_bounded_on(
    f: &StepFunction,
    a: &IntervalSet,
    delta: &Scalar,
    stages: usize,
    options: &BoundedOptions,
) -> Result<BoundedSolution, Error> {
    if delta <= &Scalar::zero() {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    if stages == 0 {
        return Err(Error::InvalidInput("stages must be at least 1".into()));
    }
    if a.measure().is_zero() {
        return Err(Error::DegenerateInput("μ(A) = 0".into()));
    }
    let f = f.restrict(a);
    let total = f.integral_total();
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let mut cols: Vec<Column> = level_sets(&f, a)
        .into_iter()
        .map(|(v, s)| Column {
            levels: vec![s],
            values: vec![v],
        })
        .collect();
    let max = options.max_branches;
    let mut states: Vec<StageState> = Vec::with_capacity(stages);
    for n in 1..=stages {
        let epsilon = stage_epsilon(delta, n);
        let (zero, nonzero): (Vec<Column>, Vec<Column>) = cols.into_iter().partition(|c| c.full_sum().is_zero());
        let mut built = Vec::new();
        if n == stages && options.exact_final {
            cols = zero;
            if !nonzero.is_empty() {
                let (c, rest) = restack(nonzero, CellRule::Exact { above: 0 }, max)?;
                debug_assert!(rest.is_empty());
                built.push(c.tower()?);
                cols.push(c);
            }
        } else if nonzero.is_empty() {
            cols = zero;
        } else {
            let mut ordered = zero;
            ordered.extend(nonzero);
            let (c, rest) = restack(ordered, CellRule::Shift { epsilon: &epsilon }, max)?;
            built.push(c.tower()?);
            cols = vec![c];
            cols.extend(rest);
        }
        let transformation = closed_map(&cols, max)?;
        let residual =
            IntervalSet::union_all(cols.iter().filter(|c| !c.full_sum().is_zero()).map(Column::top));
        let induced = StepFunction::from_sets(cols.iter().map(|c| (c.base().clone(), c.full_sum())))?;
        let tops = IntervalSet::union_all(cols.iter().map(Column::top));
        states.push(StageState {
            stage_index: n,
            transformation,
            residual_measure_bound: Scalar::zero(),
            residual,
            transfer: transfer(&cols)?,
            towers: built,
            induced,
            epsilon,
            tops,
        });
    }
    for n in 0..states.len() {
        states[n].residual_measure_bound = match states.get(n + 1) {
            Some(next) => states[n].tops.union(&next.tops).measure(),
            None => states[n].residual.measure(),
        };
    }
    let last = states.last().expect("stages ≥ 1");
    let certificate = verify(&f, &last.transformation, &last.transfer)?.certificate;
    let bound = f.sup_norm() + delta;
    if certificate.sup_bound > bound {
        return Err(Error::ConstructionFailed(format!(
            "transfer bound {} exceeds ‖f‖∞ + δ",
            scalar::format(&certificate.sup_bound)
        )));
    }
    if &certificate.exact_set.union(&last.residual) != a {
        return Err(Error::ConstructionFailed("identity fails off the residual set".into()));
    }
    Ok(BoundedSolution {
        certificate,
        stages: states,
    })
}

/// `1 − μ(exact)` for a certificate on `[0, 1)` restricted to `a`.
pub fn residual_within(cert: &SolutionCertificate, a: &IntervalSet) -> Scalar {
    a.measure() - cert.exact_set.intersection(a).measure()
}
