use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::measure::{IntervalSet, StepFunction};
use crate::scalar::{self, Scalar};
use crate::towers::pub_partition::{level_sets, DEFAULT_MAX_CELLS};
use crate::towers::tower::Tower;
use crate::Error;

/// Two disjoint towers covering the carrier of a two-valued `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerPair {
    pub towers: [Tower; 2],
    pub epsilon: Scalar,
    /// `(b-cells, c-cells)` per tower.
    pub counts: [(u64, u64); 2],
    /// Constant full-tower sum of `f` per tower.
    pub full_sums: [Scalar; 2],
}

impl TowerPair {
    pub fn heights(&self) -> (usize, usize) {
        (self.towers[0].height(), self.towers[1].height())
    }
}

/// `(b, c, B, C)` with `f = b` on `B`, `f = −c` on `C`, `b, c > 0`.
struct TwoStep {
    b: Scalar,
    c: Scalar,
    bset: IntervalSet,
    cset: IntervalSet,
}

fn split_two_step(f: &StepFunction, a: &IntervalSet) -> Result<TwoStep, Error> {
    if a.measure().is_zero() {
        return Err(Error::DegenerateInput("μ(A) = 0".into()));
    }
    let total = f.integral(a);
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let sets = level_sets(f, a);
    match sets.as_slice() {
        [(neg, cset), (pos, bset)] if neg.is_negative() && pos.is_positive() => Ok(TwoStep {
            b: pos.clone(),
            c: -neg.clone(),
            bset: bset.clone(),
            cset: cset.clone(),
        }),
        _ => Err(Error::NotTwoStep(format!("{} value(s) on A", sets.len()))),
    }
}

fn small(x: &BigInt) -> Result<u64, Error> {
    x.to_u64().filter(|&v| v as usize <= DEFAULT_MAX_CELLS).ok_or_else(|| Error::BranchLimit {
        limit: DEFAULT_MAX_CELLS,
        count: x.to_usize().unwrap_or(usize::MAX),
    })
}

/// Stacks `nb` cells of value `b` and `nc` of value `−c`: a `b` cell first,
/// then `b` while the running sum is negative and `−c` otherwise. Returns the
/// kinds in order, or fails if a running sum leaves `[−bound, bound]`.
fn pattern(b: &Scalar, c: &Scalar, nb: u64, nc: u64, bound: &Scalar) -> Result<Vec<bool>, Error> {
    let (mut left_b, mut left_c) = (nb, nc);
    let mut sigma = Scalar::zero();
    let mut out = Vec::with_capacity((nb + nc) as usize);
    while left_b + left_c > 0 {
        let want_b = out.is_empty() || sigma.is_negative();
        let take_b = if want_b { left_b > 0 } else { left_c == 0 };
        if take_b {
            left_b -= 1;
            sigma += b;
        } else {
            left_c -= 1;
            sigma -= c;
        }
        if &scalar::abs(&sigma) > bound {
            return Err(Error::ConstructionFailed(format!(
                "running sum {} leaves the bound {}",
                scalar::format(&sigma),
                scalar::format(bound)
            )));
        }
        out.push(take_b);
    }
    Ok(out)
}

/// Lays out the towers: cells of each kind are cut from `B` and `C` in
/// positional order, tower by tower.
fn assemble(ts: &TwoStep, plans: [(Vec<bool>, Scalar); 2]) -> Result<[Tower; 2], Error> {
    let mut b_widths = Vec::new();
    let mut c_widths = Vec::new();
    for (kinds, w) in &plans {
        for &k in kinds {
            if k { b_widths.push(w.clone()) } else { c_widths.push(w.clone()) }
        }
    }
    let mut b_cells = ts.bset.cut(&b_widths).into_iter();
    let mut c_cells = ts.cset.cut(&c_widths).into_iter();
    let mut out = Vec::with_capacity(2);
    for (kinds, _) in &plans {
        let levels = kinds
            .iter()
            .map(|&k| if k { b_cells.next() } else { c_cells.next() }.expect("cut yields one part per width"))
            .collect();
        out.push(Tower::stack(levels)?);
    }
    let rest = b_cells.next().into_iter().chain(c_cells.next());
    if rest.into_iter().any(|r| !r.is_empty()) {
        return Err(Error::ConstructionFailed("towers do not exhaust A".into()));
    }
    Ok(out.try_into().expect("two towers"))
}

/// Two towers for a mean-zero `f` taking a value `b > 0` on `B` and `−c < 0`
/// on `C` inside `a`.
///
/// Rational data make the ratio `c/b = p/q` exact: both towers have height
/// `M(p+q) > min_height`, hold `Mp` cells from `B` and `Mq` from `C`, and
/// their full sums vanish.
pub fn build_two_step_towers(
    f: &StepFunction,
    a: &IntervalSet,
    min_height: usize,
    epsilon: &Scalar,
) -> Result<TowerPair, Error> {
    if epsilon <= &Scalar::zero() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let ts = split_two_step(f, a)?;
    let r = &ts.c / &ts.b;
    let (p0, q0) = (r.numer().clone(), r.denom().clone());
    let block = &p0 + &q0;
    let m = (BigInt::from(min_height) + BigInt::one()).div_ceil(&block);
    let m = if m < BigInt::one() { BigInt::one() } else { m };
    let h = small(&(&m * &block))?;
    let (nb, nc) = (small(&(&m * &p0))?, small(&(&m * &q0))?);
    let bound = scalar::max(&ts.b, &ts.c);
    let kinds = pattern(&ts.b, &ts.c, nb, nc, &bound)?;
    let width = a.measure() / Scalar::from_integer(BigInt::from(2 * h));
    let towers = assemble(&ts, [(kinds.clone(), width.clone()), (kinds, width)])?;
    Ok(TowerPair {
        towers,
        epsilon: epsilon.clone(),
        counts: [(nb, nc), (nb, nc)],
        full_sums: [Scalar::zero(), Scalar::zero()],
    })
}

/// The convergent form: `(p1, q1)` and `(p2, q2)` approximate `c/b` with
/// errors `δ_j = p_j b − q_j c` of one sign, `|δ2| < |δ1| < ε`. Tower one
/// holds `p2, q2` cells, tower two `p1' = p2 − p1, q1' = q2 − q1`; widths are
/// chosen so the towers exactly fill `a`. Full sums are `δ2` and `δ2 − δ1`.
pub fn build_two_step_towers_with_convergents(
    f: &StepFunction,
    a: &IntervalSet,
    min_height: usize,
    epsilon: &Scalar,
    first: (u64, u64),
    second: (u64, u64),
) -> Result<TowerPair, Error> {
    if epsilon <= &Scalar::zero() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    let ts = split_two_step(f, a)?;
    let bad = |m: &str| Err(Error::InvalidConvergents(m.into()));
    let ((p1, q1), (p2, q2)) = (first, second);
    if p2 <= p1 || q2 <= q1 {
        return bad("need p1 < p2 and q1 < q2");
    }
    let s = |n: u64| Scalar::from_integer(BigInt::from(n));
    let d1 = s(p1) * &ts.b - s(q1) * &ts.c;
    let d2 = s(p2) * &ts.b - s(q2) * &ts.c;
    if d1.is_zero() || d2.is_zero() || d1.is_positive() != d2.is_positive() {
        return bad("δ1 and δ2 must be nonzero with the same sign");
    }
    if !(scalar::abs(&d2) < scalar::abs(&d1) && &scalar::abs(&d1) < epsilon) {
        return bad("need |δ2| < |δ1| < ε");
    }
    if !(s(p1) < epsilon * s(p2) && s(q1) < epsilon * s(q2)) {
        return bad("need p1 < ε p2 and q1 < ε q2");
    }
    let (p3, q3) = (p2 - p1, q2 - q1);
    let (h1, h2) = (p2 + q2, p3 + q3);
    if h1.min(h2) as usize <= min_height {
        return bad("tower heights do not exceed the minimum height");
    }
    if h1.max(h2) as usize > DEFAULT_MAX_CELLS {
        return Err(Error::BranchLimit {
            limit: DEFAULT_MAX_CELLS,
            count: h1.max(h2) as usize,
        });
    }
    let ratio = s(h1) / s(h2);
    let one = Scalar::one();
    if !(&one - epsilon < ratio && ratio < &one + epsilon) {
        return bad("height ratio h1/h2 is not within ε of 1");
    }
    let d3 = &d1 - &d2;
    let denom = s(h1) * scalar::abs(&d3) + s(h2) * scalar::abs(&d2);
    let w1 = a.measure() * scalar::abs(&d3) / &denom;
    let w2 = a.measure() * scalar::abs(&d2) / &denom;
    let bound = scalar::max(&ts.b, &ts.c);
    let k1 = pattern(&ts.b, &ts.c, p2, q2, &bound)?;
    let k2 = pattern(&ts.b, &ts.c, p3, q3, &bound)?;
    let towers = assemble(&ts, [(k1, w1), (k2, w2)])?;
    Ok(TowerPair {
        towers,
        epsilon: epsilon.clone(),
        counts: [(p2, q2), (p3, q3)],
        full_sums: [d2.clone(), d2 - d1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Interval;
    use crate::scalar::{int, ratio};

    fn set(a: i64, b: i64, d: i64) -> IntervalSet {
        IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
    }

    fn check(pair: &TowerPair, f: &StepFunction, a: &IntervalSet) {
        let support = pair.towers[0].support().union(&pair.towers[1].support());
        assert_eq!(&support, a);
        assert!(pair.towers[0].support().is_disjoint_from(&pair.towers[1].support()));
        for (t, s) in pair.towers.iter().zip(&pair.full_sums) {
            let audit = t.audit(f);
            assert!(audit.full_sum_constant);
            assert_eq!(&t.full_sum(f), &StepFunction::constant_on(t.base(), s.clone()));
            assert!(audit.is_tub(&f.sup_norm(), &pair.epsilon));
        }
    }

    #[test]
    fn equal_halves() {
        let f = StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap();
        let a = IntervalSet::unit();
        let pair = build_two_step_towers(&f, &a, 3, &ratio(1, 10)).unwrap();
        assert_eq!(pair.heights(), (4, 4));
        assert_eq!(pair.counts[0], (2, 2));
        check(&pair, &f, &a);
    }

    #[test]
    fn two_to_one() {
        let f = StepFunction::from_sets([(set(0, 2, 3), int(1)), (set(2, 3, 3), int(-2))]).unwrap();
        let a = IntervalSet::unit();
        let pair = build_two_step_towers(&f, &a, 1, &ratio(1, 10)).unwrap();
        assert_eq!(pair.heights(), (3, 3));
        assert_eq!(pair.counts[0], (2, 1));
        check(&pair, &f, &a);
    }

    #[test]
    fn convergents_of_root_two() {
        // b = 1, c = 1.4142 so μ(B) = c/(b+c).
        let c = ratio(7071, 5000);
        let mb = &c / (int(1) + &c);
        let cut = Interval::new(int(0), mb.clone()).unwrap();
        let rest = Interval::new(mb.clone(), int(1)).unwrap();
        let f = StepFunction::from_pieces([(cut, int(1)), (rest, -c.clone())]).unwrap();
        let a = IntervalSet::unit();
        let eps = ratio(1, 5);
        let pair = build_two_step_towers_with_convergents(&f, &a, 1, &eps, (3, 2), (99, 70)).unwrap();
        assert_eq!(pair.heights(), (169, 164));
        let d1 = int(3) - int(2) * &c;
        let d2 = int(99) - int(70) * &c;
        assert_eq!(pair.full_sums, [d2.clone(), &d2 - &d1]);
        // B-measure carried by the towers matches μ(B).
        let w: Vec<Scalar> = pair.towers.iter().map(Tower::width).collect();
        assert_eq!(&w[0] * int(99) + &w[1] * int(96), mb);
        check(&pair, &f, &a);
    }

    #[test]
    fn rejects_bad_convergents() {
        let c = ratio(7071, 5000);
        let mb = &c / (int(1) + &c);
        let f = StepFunction::from_pieces([
            (Interval::new(int(0), mb.clone()).unwrap(), int(1)),
            (Interval::new(mb, int(1)).unwrap(), -c),
        ])
        .unwrap();
        let a = IntervalSet::unit();
        // (7, 5): δ = 7 − 7.07 has the wrong sign.
        assert!(matches!(
            build_two_step_towers_with_convergents(&f, &a, 1, &ratio(1, 5), (3, 2), (7, 5)),
            Err(Error::InvalidConvergents(_))
        ));
    }

    #[test]
    fn rejects_three_values() {
        let f = StepFunction::from_sets([(set(0, 1, 4), int(2)), (set(1, 2, 4), int(-1)), (set(2, 4, 4), ratio(-1, 2))]).unwrap();
        assert!(matches!(
            build_two_step_towers(&f, &IntervalSet::unit(), 1, &ratio(1, 2)),
            Err(Error::NotTwoStep(_))
        ));
    }
}
