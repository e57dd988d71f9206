mod common;

use coboundary::scalar::{int, ratio};
use coboundary::solver::{
    check_solvability, construct_bounded_on, construct_bounded_solution, construct_lp_solution, verify, BoundedOptions,
    Verdict,
};
use coboundary::towers::{build_tub_tower, build_two_step_towers, decompose_two_value};
use coboundary::{IntervalSet, PiecewiseTranslation, Scalar, StepFunction};
use common::{mean_zero, set};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn bounded_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let delta = ratio(1, 4);
    for _ in 0..8 {
        let f = mean_zero(&mut rng, 6, 12);
        let s = construct_bounded_solution(&f, &delta, 3).unwrap();
        let c = &s.certificate;
        assert!(c.sup_bound <= f.sup_norm() + &delta);
        assert!(c.residual_bound <= s.beta_sum());
        assert!(c.is_global());
        assert!(c.recheck().unwrap());
        for st in &s.stages {
            for t in &st.towers {
                assert!(t.audit(&f).is_tub(&f.sup_norm(), &st.epsilon));
            }
        }
    }
}

#[test]
fn open_final_stage_keeps_residual_inside_beta() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let opts = BoundedOptions {
        exact_final: false,
        ..Default::default()
    };
    for _ in 0..3 {
        let f = mean_zero(&mut rng, 4, 12);
        let s = construct_bounded_on(&f, &IntervalSet::unit(), &ratio(1, 4), 3, &opts).unwrap();
        let c = &s.certificate;
        assert!(c.residual_bound <= s.beta_sum());
        assert!(c.sup_bound <= f.sup_norm() + ratio(1, 4));
        // Consecutive maps differ only inside the tops.
        for w in s.stages.windows(2) {
            let d = w[0].transformation.disagreement(&w[1].transformation);
            assert!(d.measure() <= w[0].residual_measure_bound);
        }
    }
}

#[test]
fn tub_corpus() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let eps = ratio(1, 8);
    for _ in 0..8 {
        let f = mean_zero(&mut rng, 6, 12);
        let q = [set(0, 1, 3), set(1, 3, 3)];
        let t = build_tub_tower(&f, &IntervalSet::unit(), &eps, 4, &q).unwrap();
        assert!(t.height() > 4);
        let audit = t.audit(&f);
        assert!(audit.is_tub(&f.sup_norm(), &eps));
        assert!(audit.max_abs_full_sum.is_zero());
        for part in &q {
            let covered = IntervalSet::union_all(t.levels().iter().filter(|l| l.is_subset_of(part)));
            assert_eq!(&covered, part);
        }
    }
}

#[test]
fn two_step_pairs() {
    for (b, c) in [(1, 1), (1, 2), (2, 3), (3, 7), (5, 2)] {
        let (b, c) = (int(b), int(c));
        // f = b on [0, x), −c on [x, 1) with b·x = c·(1 − x).
        let x = &c / (&b + &c);
        let left = IntervalSet::from(coboundary::Interval::new(int(0), x.clone()).unwrap());
        let f = StepFunction::from_sets([(left.clone(), b.clone()), (left.complement(), -c.clone())]).unwrap();
        let eps = ratio(1, 5);
        let pair = build_two_step_towers(&f, &IntervalSet::unit(), 3, &eps).unwrap();
        let (h1, h2) = pair.heights();
        assert!(h1 > 3 && h2 > 3);
        let h = Scalar::from_integer(h1.into()) / Scalar::from_integer(h2.into());
        assert!(int(1) - &eps < h && h < int(1) + &eps);
        let union = pair.towers[0].support().union(&pair.towers[1].support());
        assert_eq!(union, IntervalSet::unit());
        for t in &pair.towers {
            let a = t.audit(&f);
            assert!(a.full_sum_constant && a.max_abs_full_sum < eps);
        }
    }
}

#[test]
fn decomposition_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..20 {
        let f = mean_zero(&mut rng, 8, 24);
        let m = f.distinct_values().len();
        let d = decompose_two_value(&f).unwrap();
        assert!(d.parts.len() < m.max(2));
        for (carrier, g) in &d.parts {
            assert!(g.integral_total().is_zero());
            assert!(g.distinct_values().len() <= 2);
            assert_eq!(&g.support(), carrier);
        }
        let union = IntervalSet::union_all(d.carriers());
        assert_eq!(union, f.support());
    }
}

#[test]
fn lp_chain_on_bands() {
    let f = StepFunction::from_sets([
        (set(0, 1, 4), ratio(5, 2)),
        (set(1, 2, 4), ratio(-1, 2)),
        (set(2, 3, 4), ratio(-3, 2)),
        (set(3, 4, 4), ratio(-1, 2)),
    ])
    .unwrap();
    let s = construct_lp_solution(&f, 2, &ratio(1, 4), 2, &BoundedOptions::default()).unwrap();
    assert!(s.certificate.is_global());
    assert!(s.report.total_holds && s.report.tail_holds);
    assert!(s.report.bands.len() >= 2);
}

#[test]
fn verify_refutes_perturbation() {
    let f = StepFunction::from_sets([(set(0, 1, 2), int(1)), (set(1, 2, 2), int(-1))]).unwrap();
    let s = construct_bounded_solution(&f, &ratio(1, 4), 2).unwrap();
    let c = &s.certificate;
    let bumped = c.transfer.add(&StepFunction::constant_on(&set(0, 1, 8), int(1)));
    let v = verify(&f, &c.transformation, &bumped).unwrap();
    assert!(v.refuted());
    assert!(v.witness.measure() > Scalar::zero());
}

#[test]
fn unbalanced_is_rejected() {
    let f = StepFunction::indicator(&set(0, 1, 3));
    assert_eq!(check_solvability(&f).verdict, Verdict::Unbalanced);
    assert!(construct_bounded_solution(&f, &ratio(1, 4), 2).is_err());
    let rot = PiecewiseTranslation::rotation(&ratio(1, 3)).unwrap();
    assert!(verify(&f, &rot, &StepFunction::zero()).unwrap().refuted());
}
