#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coboundary::scalar::{int, ratio};
use coboundary::{Interval, IntervalSet, Scalar, StepFunction};
use rand::Rng;
use serde::Serialize;
use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_coboundary");

pub fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn coboundary")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(value).unwrap()).unwrap();
    p
}

pub fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn text(v: &Value) -> Scalar {
    coboundary::scalar::parse(v.as_str().expect("rational string")).unwrap()
}

pub fn set(a: i64, b: i64, d: i64) -> IntervalSet {
    IntervalSet::from(Interval::new(ratio(a, d), ratio(b, d)).unwrap())
}

/// Mean-zero step function on the `1/grid` mesh with at most `max_values`
/// distinct values: integers in [-4, 4], the last piece balancing the rest.
pub fn mean_zero(rng: &mut impl Rng, max_values: usize, grid: i64) -> StepFunction {
    loop {
        let pieces = rng.gen_range(2..=max_values);
        let mut cuts: Vec<i64> = (0..pieces - 1).map(|_| rng.gen_range(1..grid)).collect();
        cuts.sort_unstable();
        cuts.dedup();
        cuts.insert(0, 0);
        cuts.push(grid);
        let mut f = StepFunction::zero();
        for w in cuts.windows(2).take(cuts.len() - 2) {
            f = f.add(&StepFunction::constant_on(&set(w[0], w[1], grid), int(rng.gen_range(-4..=4))));
        }
        let last = set(cuts[cuts.len() - 2], grid, grid);
        let v = -f.integral_total() / last.measure();
        let f = f.add(&StepFunction::constant_on(&last, v));
        if !f.is_zero() && f.distinct_values().len() <= max_values {
            return f;
        }
    }
}
