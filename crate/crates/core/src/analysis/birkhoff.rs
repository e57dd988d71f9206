use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::numeric::{pow_bracket, Bracket, DEFAULT_BITS};
use crate::scalar::{self, Scalar};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelStat {
    #[serde(with = "scalar::serde_text")]
    pub threshold: Scalar,
    /// `μ{|S_n f| ≤ threshold}`.
    #[serde(with = "scalar::serde_text")]
    pub measure_le: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BirkhoffReport {
    pub n: u64,
    pub sum_function: StepFunction,
    pub level_stats: Vec<LevelStat>,
}

fn require_bijection(t: &PiecewiseTranslation) -> Result<(), Error> {
    if !t.is_bijection_of(&IntervalSet::unit()) {
        return Err(Error::DomainMismatch("T must be a bijection of [0,1)".into()));
    }
    Ok(())
}

/// Iterates `S_1 f, S_2 f, …` through `S_{k+1} = f + S_k∘T`.
struct Sums<'a> {
    f: &'a StepFunction,
    t: &'a PiecewiseTranslation,
    current: StepFunction,
}

impl<'a> Sums<'a> {
    fn new(f: &'a StepFunction, t: &'a PiecewiseTranslation) -> Self {
        Sums {
            f,
            t,
            current: StepFunction::zero(),
        }
    }
}

impl Iterator for Sums<'_> {
    type Item = StepFunction;

    fn next(&mut self) -> Option<StepFunction> {
        self.current = self.f.add(&self.current.pullback_partial(self.t));
        Some(self.current.clone())
    }
}

fn measure_le(s: &StepFunction, m: &Scalar, on: &IntervalSet) -> Scalar {
    s.where_value(|v| v.abs() <= *m).intersection(on).measure()
}

/// `S_n f = Σ_{i<n} f∘T^i` with the measure of `{|S_n f| ≤ M}` for each threshold.
pub fn birkhoff(f: &StepFunction, t: &PiecewiseTranslation, n: u64, thresholds: &[Scalar]) -> Result<BirkhoffReport, Error> {
    require_bijection(t)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let sum_function = Sums::new(f, t).nth(n as usize - 1).expect("infinite iterator");
    let unit = IntervalSet::unit();
    let level_stats = thresholds
        .iter()
        .map(|m| LevelStat {
            threshold: m.clone(),
            measure_le: measure_le(&sum_function, m, &unit),
        })
        .collect();
    Ok(BirkhoffReport { n, sum_function, level_stats })
}

/// `μ{|S_n f| ≤ M}` for `n = 1..=n_max`.
pub fn schmidt_profile(f: &StepFunction, t: &PiecewiseTranslation, m: &Scalar, n_max: u64) -> Result<Vec<(u64, Scalar)>, Error> {
    schmidt_profile_on(f, t, m, n_max, &IntervalSet::unit())
}

/// Profile of `μ({|S_n f| ≤ M} ∩ E) / μ(E)`; `E` nonempty.
pub fn schmidt_profile_on(
    f: &StepFunction,
    t: &PiecewiseTranslation,
    m: &Scalar,
    n_max: u64,
    on: &IntervalSet,
) -> Result<Vec<(u64, Scalar)>, Error> {
    require_bijection(t)?;
    let total = on.measure();
    if total.is_zero() {
        return Err(Error::InvalidInput("restriction set has measure zero".into()));
    }
    Ok(Sums::new(f, t)
        .take(n_max as usize)
        .enumerate()
        .map(|(i, s)| (i as u64 + 1, measure_le(&s, m, on) / &total))
        .collect())
}

/// `min_{n ≤ n_max} μ{|S_n f| ≤ M}`.
pub fn schmidt_statistic(f: &StepFunction, t: &PiecewiseTranslation, m: &Scalar, n_max: u64) -> Result<Scalar, Error> {
    schmidt_statistic_on(f, t, m, n_max, &IntervalSet::unit())
}

/// The statistic relative to `E`.
pub fn schmidt_statistic_on(
    f: &StepFunction,
    t: &PiecewiseTranslation,
    m: &Scalar,
    n_max: u64,
    on: &IntervalSet,
) -> Result<Scalar, Error> {
    Ok(schmidt_profile_on(f, t, m, n_max, on)?
        .into_iter()
        .map(|(_, v)| v)
        .min()
        .unwrap_or_else(Scalar::one))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DnVerdict {
    /// `μ{|S_k f| > n} > η` at this `k`.
    Found {
        k: u64,
        #[serde(with = "scalar::serde_text")]
        measure: Scalar,
    },
    NotFoundUpTo { k_max: u64 },
}

/// Searches `k ∈ (n, k_max]` for `μ{|S_k f| > n} > η`, with `0 < η < 1/10`.
pub fn dn_membership(
    f: &StepFunction,
    t: &PiecewiseTranslation,
    n: u64,
    eta: &Scalar,
    k_max: u64,
) -> Result<DnVerdict, Error> {
    require_bijection(t)?;
    if !eta.is_positive() || *eta >= scalar::ratio(1, 10) {
        return Err(Error::InvalidInput("η must lie in (0, 1/10)".into()));
    }
    let bound = Scalar::from_integer(n.into());
    for (i, s) in Sums::new(f, t).take(k_max as usize).enumerate() {
        let k = i as u64 + 1;
        if k <= n {
            continue;
        }
        let measure = s.where_value(|v| v.abs() > bound).measure();
        if measure > *eta {
            return Ok(DnVerdict::Found { k, measure });
        }
    }
    Ok(DnVerdict::NotFoundUpTo { k_max })
}

/// `∫|g|^q`, exact for integer `q` and bracketed otherwise.
pub fn lq_norm(g: &StepFunction, q: &Scalar) -> Result<Bracket, Error> {
    if !q.is_positive() {
        return Err(Error::InvalidInput("q must be positive".into()));
    }
    if q.is_integer() {
        let k = scalar::as_small_integer(q)
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| Error::ExponentNotRepresentable(format!("q = {}", scalar::format(q))))?;
        return Ok(Bracket::exact(g.abs_power_integral(k)));
    }
    let mut total = Bracket::exact(Scalar::zero());
    for (iv, v) in g.pieces() {
        total = total.add(&pow_bracket(&v.abs(), q, DEFAULT_BITS).scale(&iv.measure()));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Interval;
    use crate::scalar::{int, ratio};

    fn set(a: i64, b: i64, d: i64) -> IntervalSet {
        IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
    }

    fn halves() -> StepFunction {
        StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap()
    }

    // Point evaluation of Σ_{i<n} f(T^i x).
    fn oracle(f: &StepFunction, t: &PiecewiseTranslation, n: u64, x: &Scalar) -> Scalar {
        let mut y = x.clone();
        let mut s = Scalar::zero();
        for _ in 0..n {
            s += f.value_at(&y);
            y = t.apply(&y).unwrap();
        }
        s
    }

    #[test]
    fn rotation_two_fifths_period() {
        let t = PiecewiseTranslation::rotation(&ratio(2, 5)).unwrap();
        let r = birkhoff(&halves(), &t, 5, &[int(0), int(1)]).unwrap();
        // Five points spaced 1/5 apart split 3:2 or 2:3 between the halves, so
        // S_5 f = ±1, never 0.
        assert_eq!(r.level_stats[0].measure_le, int(0));
        assert_eq!(r.level_stats[1].measure_le, int(1));
        assert_eq!(r.sum_function.where_value(|v| *v == int(1)).measure(), ratio(1, 2));
        for j in 0..10 {
            let x = ratio(2 * j + 1, 20);
            assert_eq!(r.sum_function.value_at(&x), oracle(&halves(), &t, 5, &x));
        }
        let grid_sum: Scalar = (0..10).map(|j| oracle(&halves(), &t, 5, &ratio(2 * j + 1, 20))).sum();
        assert_eq!(grid_sum, int(0));
    }

    #[test]
    fn indicator_grows() {
        let t = PiecewiseTranslation::rotation(&ratio(2, 5)).unwrap();
        let f = StepFunction::indicator(&set(0, 1, 2));
        let r = birkhoff(&f, &t, 10, &[int(4), int(6)]).unwrap();
        for j in 0..20 {
            let x = ratio(2 * j + 1, 40);
            assert_eq!(r.sum_function.value_at(&x), oracle(&f, &t, 10, &x));
        }
        // Each 5-cycle meets the left half 2 or 3 times, so S_10 ∈ {4, 6}.
        assert_eq!(r.level_stats[0].measure_le, ratio(1, 2));
        assert_eq!(r.level_stats[1].measure_le, int(1));
    }

    #[test]
    fn coboundary_is_tight() {
        let t = PiecewiseTranslation::rotation(&ratio(1, 2)).unwrap();
        let g = StepFunction::indicator(&set(0, 1, 2));
        let f = g.sub(&g.pullback(&t).unwrap());
        assert_eq!(schmidt_statistic(&f, &t, &int(2), 30).unwrap(), int(1));
        assert_eq!(schmidt_statistic(&StepFunction::zero(), &t, &int(0), 5).unwrap(), int(1));
        assert_eq!(dn_membership(&f, &t, 3, &ratio(1, 20), 40).unwrap(), DnVerdict::NotFoundUpTo { k_max: 40 });
    }

    #[test]
    fn positive_mean_decays() {
        let t = PiecewiseTranslation::rotation(&ratio(1, 3)).unwrap();
        let f = StepFunction::indicator(&set(0, 1, 2));
        let p = schmidt_profile(&f, &t, &int(1), 12).unwrap();
        assert_eq!(p[0].1, int(1));
        assert_eq!(p.last().unwrap().1, int(0));
        assert!(matches!(dn_membership(&f, &t, 1, &ratio(1, 20), 10).unwrap(), DnVerdict::Found { k: 2, .. }));
        assert!(dn_membership(&f, &t, 1, &ratio(1, 10), 10).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(lq_norm(&StepFunction::indicator(&set(0, 1, 2)), &int(2)).unwrap(), Bracket::exact(ratio(1, 2)));
        let g = StepFunction::constant_on(&set(0, 1, 4), int(2));
        assert_eq!(lq_norm(&g, &int(3)).unwrap(), Bracket::exact(int(2)));
        let b = lq_norm(&g, &ratio(3, 2)).unwrap();
        assert!(!b.is_exact());
        // 2^{3/2}/4 = √2/2
        let two = int(2);
        assert!(&b.lo * &b.lo * &two * &two <= two && &b.hi * &b.hi * &two * &two >= two);
        assert!(b.relative_width() < ratio(1, 1_000_000));
    }
}
