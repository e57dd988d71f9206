#![allow(dead_code)]

use coboundary::scalar::{int, ratio};
use coboundary::{Interval, IntervalSet, Scalar, StepFunction};
use rand::Rng;

pub fn set(a: i64, b: i64, d: i64) -> IntervalSet {
    IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
}

/// Mean-zero step function on a `1/grid` mesh with at most `max_values`
/// pieces: integer values in `[-4, 4]`, the last piece balancing the rest.
pub fn mean_zero<R: Rng>(rng: &mut R, max_values: usize, grid: i64) -> StepFunction {
    loop {
        let m = rng.gen_range(2..=max_values);
        let mut cuts: Vec<i64> = (1..grid).collect();
        for i in (1..cuts.len()).rev() {
            cuts.swap(i, rng.gen_range(0..=i));
        }
        let mut cuts: Vec<i64> = cuts.into_iter().take(m - 1).collect();
        cuts.push(0);
        cuts.push(grid);
        cuts.sort();
        let mut pieces = Vec::new();
        let mut mass = Scalar::from_integer(0.into());
        for w in cuts.windows(2).take(m - 1) {
            let v = int(rng.gen_range(-4..=4));
            mass += ratio(w[1] - w[0], grid) * &v;
            pieces.push((Interval::new(ratio(w[0], grid), ratio(w[1], grid)).unwrap(), v));
        }
        let last = &cuts[m - 1..];
        let width = ratio(last[1] - last[0], grid);
        let v = -mass / width;
        pieces.push((Interval::new(ratio(last[0], grid), int(1)).unwrap(), v));
        let f = StepFunction::from_pieces(pieces).unwrap();
        if !f.is_zero() {
            return f;
        }
    }
}
