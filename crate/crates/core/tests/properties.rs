use coboundary::analysis::{birkhoff, lq_norm, schmidt_statistic};
use coboundary::numeric::{pow_bracket, DEFAULT_BITS};
use coboundary::scalar::{int, ratio};
use coboundary::solver::{construct_bounded_solution, verify};
use coboundary::towers::decompose_two_value;
use coboundary::{Interval, IntervalSet, PiecewiseTranslation, Scalar, StepFunction};
use num_traits::Zero;
use proptest::prelude::*;

const GRID: i64 = 24;

/// Pieces `(width, value)` laid left to right on the `1/GRID` mesh.
fn step(pieces: &[(i64, i64)]) -> StepFunction {
    let mut lo = 0;
    let mut out = Vec::new();
    for &(w, v) in pieces {
        let hi = (lo + w).min(GRID);
        if hi > lo {
            out.push((Interval::new(ratio(lo, GRID), ratio(hi, GRID)).unwrap(), int(v)));
        }
        lo = hi;
    }
    StepFunction::from_pieces(out).unwrap()
}

fn arb_step() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((1i64..6, -4i64..=4), 1..6).prop_map(|p| step(&p))
}

/// Mean zero: the tail `[x, 1)` absorbs the integral of the prefix.
fn arb_mean_zero() -> impl Strategy<Value = StepFunction> {
    prop::collection::vec((1i64..4, -4i64..=4), 1..5).prop_map(|p| {
        let f = step(&p);
        let used: i64 = p.iter().map(|x| x.0).sum::<i64>().min(GRID - 1);
        let tail = IntervalSet::from(Interval::new(ratio(used, GRID), int(1)).unwrap());
        let v = -f.integral_total() / tail.measure();
        f.add(&StepFunction::constant_on(&tail, v))
    })
}

fn arb_set() -> impl Strategy<Value = IntervalSet> {
    prop::collection::vec((0i64..GRID, 1i64..6), 0..4).prop_map(|v| {
        IntervalSet::from_intervals(
            v.into_iter()
                .map(|(a, w)| Interval::new(ratio(a, GRID), ratio((a + w).min(GRID), GRID)).unwrap()),
        )
    })
}

fn arb_rotation() -> impl Strategy<Value = PiecewiseTranslation> {
    (1i64..12, 2i64..13).prop_map(|(a, b)| PiecewiseTranslation::rotation(&(ratio(a % b, b))).unwrap())
}

proptest! {
    #[test]
    fn inclusion_exclusion(a in arb_set(), b in arb_set()) {
        prop_assert_eq!(a.union(&b).measure() + a.intersection(&b).measure(), a.measure() + b.measure());
        prop_assert_eq!(a.difference(&b).measure() + a.intersection(&b).measure(), a.measure());
        prop_assert_eq!(a.complement().measure() + a.measure(), int(1));
    }

    #[test]
    fn split_at_measure_is_positional(a in arb_set(), k in 0i64..=8) {
        let m = a.measure() * ratio(k, 8);
        let (front, back) = a.split_at_measure(&m);
        prop_assert_eq!(front.measure(), m);
        prop_assert_eq!(front.union(&back), a.clone());
        prop_assert!(front.is_disjoint_from(&back));
    }

    #[test]
    fn pullback_preserves_integral(f in arb_step(), t in arb_rotation()) {
        prop_assert_eq!(f.pullback(&t).unwrap().integral_total(), f.integral_total());
        let back = t.invert().unwrap();
        prop_assert_eq!(f.pullback(&t).unwrap().pullback(&back).unwrap(), f);
    }

    #[test]
    fn coboundaries_verify(g in arb_step(), t in arb_rotation()) {
        let f = g.sub(&g.pullback(&t).unwrap());
        let v = verify(&f, &t, &g).unwrap();
        prop_assert!(v.certificate.is_global());
        prop_assert!(!v.refuted());
        // Telescoping: |S_n f| = |g − g∘T^n| ≤ 2‖g‖∞.
        let m = g.sup_norm() * int(2);
        prop_assert_eq!(schmidt_statistic(&f, &t, &m, 12).unwrap(), int(1));
    }

    #[test]
    fn birkhoff_matches_pointwise(f in arb_step(), t in arb_rotation(), n in 1u64..8) {
        let r = birkhoff(&f, &t, n, &[]).unwrap();
        for j in 0..GRID {
            let x = ratio(2 * j + 1, 2 * GRID);
            let mut y = x.clone();
            let mut s = Scalar::zero();
            for _ in 0..n {
                s += f.value_at(&y);
                y = t.apply(&y).unwrap();
            }
            prop_assert_eq!(r.sum_function.value_at(&x), s);
        }
    }

    #[test]
    fn two_value_parts(f in arb_mean_zero()) {
        let m = f.distinct_values().len();
        let d = decompose_two_value(&f).unwrap();
        prop_assert!(d.parts.len() <= m.saturating_sub(1));
        for (_, g) in &d.parts {
            prop_assert!(g.integral_total().is_zero());
            prop_assert!(g.distinct_values().len() <= 2);
        }
    }

    #[test]
    fn integer_norms_are_exact(f in arb_step(), q in 1u32..4) {
        let b = lq_norm(&f, &int(q as i64)).unwrap();
        prop_assert!(b.is_exact());
        prop_assert_eq!(b.lo, f.abs_power_integral(q));
    }

    #[test]
    fn root_brackets_contain(x in 1i64..50, d in 2i64..6) {
        let e = ratio(1, d);
        let b = pow_bracket(&int(x), &e, DEFAULT_BITS);
        let lo = num_traits::pow(b.lo.clone(), d as usize);
        let hi = num_traits::pow(b.hi.clone(), d as usize);
        prop_assert!(lo <= int(x) && int(x) <= hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bounded_solutions(f in arb_mean_zero()) {
        let delta = ratio(1, 4);
        let s = construct_bounded_solution(&f, &delta, 2).unwrap();
        let c = &s.certificate;
        prop_assert!(c.sup_bound <= f.sup_norm() + &delta);
        prop_assert!(c.is_global());
        prop_assert!(c.residual_bound <= s.beta_sum());
        prop_assert!(c.transformation.is_bijection_of(&IntervalSet::unit()));
    }
}
