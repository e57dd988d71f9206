use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::solver::verify::verify;
use crate::towers::Tower;
use crate::Error;

/// Sum of `f` from the bottom to the top of each tower, as a function on the
/// union of the bases.
pub fn induced_function(f: &StepFunction, towers: &[Tower]) -> StepFunction {
    towers.iter().fold(StepFunction::zero(), |acc, t| acc.add(&t.full_sum(f)))
}

/// Lifts a solution on the tower bases to the whole tower union.
///
/// With `A` the union of the bases and `f_A` the bottom-to-top sums, `g_A` must
/// satisfy `f_A = g_A − g_A∘T_A` on `A`. The new map climbs each tower and
/// leaves its top for `T_A` of the point below it on the base; the transfer
/// function on level `j` is `g_A` minus the sum of `f` over the levels below.
pub fn extend_coboundary(
    f: &StepFunction,
    towers: &[Tower],
    t_a: &PiecewiseTranslation,
    g_a: &StepFunction,
) -> Result<(PiecewiseTranslation, StepFunction), Error> {
    let bad = |m: String| Error::InvalidBaseSolution(m);
    let a = IntervalSet::union_all(towers.iter().map(Tower::base));
    if !t_a.is_bijection_of(&a) {
        return Err(bad("T_A must be a bijection of the union of the bases".into()));
    }
    let f_a = induced_function(f, towers);
    let check = verify(&f_a, t_a, &g_a.restrict(&a))?;
    if check.certificate.exact_set != a {
        return Err(bad(format!("f_A ≠ g_A − g_A∘T_A on {}", a.difference(&check.certificate.exact_set))));
    }
    let g_a = g_a.restrict(&a);
    let mut branches = Vec::new();
    let mut g = StepFunction::zero();
    for t in towers {
        branches.extend(t.map().branches().iter().cloned());
        let climb = t.climb();
        let sums = t.running_sums(f);
        let base = t.base();
        for (j, phi) in climb.iter().enumerate() {
            let below = if j == 0 { StepFunction::zero() } else { sums[j - 1].clone() };
            let on_base = g_a.restrict(base).sub(&below);
            g = g.add(&on_base.pullback_partial(&phi.inverse_partial()));
        }
        let top = climb.last().expect("height ≥ 1").inverse_partial();
        branches.extend(t_a.compose_partial(&top).branches().iter().cloned());
    }
    Ok((PiecewiseTranslation::new(branches)?, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Interval;
    use crate::scalar::{int, ratio};
    use crate::towers::build_two_step_towers;

    fn set(a: i64, b: i64, d: i64) -> IntervalSet {
        IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
    }

    #[test]
    fn height_one_is_identity_extension() {
        let t = Tower::stack(vec![IntervalSet::unit()]).unwrap();
        let rot = PiecewiseTranslation::rotation(&ratio(1, 2)).unwrap();
        let g = StepFunction::indicator(&set(0, 1, 2));
        let f = g.sub(&g.pullback(&rot).unwrap());
        let (tt, gg) = extend_coboundary(&f, &[t], &rot, &g).unwrap();
        assert_eq!(tt, rot);
        assert_eq!(gg, g);
    }

    #[test]
    fn height_two_over_half() {
        let t = Tower::stack(vec![set(0, 1, 2), set(1, 2, 2)]).unwrap();
        let f = StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap();
        let id = PiecewiseTranslation::identity(&set(0, 1, 2));
        let (tt, g) = extend_coboundary(&f, &[t], &id, &StepFunction::zero()).unwrap();
        // f = g − g∘T puts −1 on the second level.
        assert_eq!(g, StepFunction::constant_on(&set(1, 2, 2), int(-1)));
        assert!(verify(&f, &tt, &g).unwrap().certificate.is_global());
    }

    #[test]
    fn two_step_pipeline() {
        let f = StepFunction::from_sets([(set(0, 2, 3), int(1)), (set(2, 3, 3), int(-2))]).unwrap();
        let pair = build_two_step_towers(&f, &IntervalSet::unit(), 1, &ratio(1, 4)).unwrap();
        let bases = pair.towers[0].base().union(pair.towers[1].base());
        // The bases form one cycle under a half rotation of their union.
        let (b0, b1) = (pair.towers[0].base().clone(), pair.towers[1].base().clone());
        let t_a = PiecewiseTranslation::order_preserving(&b0, &b1)
            .unwrap()
            .union(&PiecewiseTranslation::order_preserving(&b1, &b0).unwrap())
            .unwrap();
        assert!(t_a.is_bijection_of(&bases));
        let (tt, g) = extend_coboundary(&f, &pair.towers, &t_a, &StepFunction::zero()).unwrap();
        let v = verify(&f, &tt, &g).unwrap();
        assert!(v.certificate.is_global());
        assert!(g.sup_norm() <= f.sup_norm());
    }

    #[test]
    fn rejects_wrong_base_solution() {
        let t = Tower::stack(vec![set(0, 1, 2), set(1, 2, 2)]).unwrap();
        let f = StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap();
        let swap = PiecewiseTranslation::order_preserving(&set(0, 1, 4), &set(1, 2, 4))
            .unwrap()
            .union(&PiecewiseTranslation::order_preserving(&set(1, 2, 4), &set(0, 1, 4)).unwrap())
            .unwrap();
        let g_a = StepFunction::constant_on(&set(0, 1, 4), int(1));
        assert!(matches!(extend_coboundary(&f, &[t], &swap, &g_a), Err(Error::InvalidBaseSolution(_))));
    }
}
