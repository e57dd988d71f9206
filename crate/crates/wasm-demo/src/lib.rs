//! Browser bindings: JSON in, JSON out. The `*_json` functions are plain Rust
//! so the same code runs under `cargo test`.

use coboundary::analysis::schmidt_profile;
use coboundary::scalar::{self, int, Scalar};
use coboundary::solver::construct_bounded_solution;
use coboundary::towers::build_two_step_towers;
use coboundary::{Interval, IntervalSet, PiecewiseTranslation, StepFunction};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn rational(s: &str, name: &str) -> Result<Scalar, String> {
    scalar::parse(s).map_err(|e| format!("{name}: {e}"))
}

fn pieces(f: &StepFunction) -> Value {
    f.pieces()
        .iter()
        .map(|(iv, v)| json!([scalar::to_f64(iv.lo()), scalar::to_f64(iv.hi()), scalar::to_f64(v)]))
        .collect()
}

fn spans(s: &IntervalSet) -> Value {
    s.intervals().iter().map(|iv| json!([scalar::to_f64(iv.lo()), scalar::to_f64(iv.hi())])).collect()
}

/// Bounded transfer function for `f` (step-function JSON).
pub fn construct_transfer_json(f: &str, delta: &str, stages: usize) -> Result<String, String> {
    let f: StepFunction = serde_json::from_str(f).map_err(|e| format!("f: {e}"))?;
    let delta = rational(delta, "delta")?;
    if !(1..=4).contains(&stages) {
        return Err("stages: keep it between 1 and 4 in the browser".into());
    }
    let s = construct_bounded_solution(&f, &delta, stages).map_err(|e| e.to_string())?;
    let c = &s.certificate;
    Ok(json!({
        "sup_f": scalar::format(&f.sup_norm()),
        "sup_g": scalar::format(&c.sup_bound),
        "beta_sum": scalar::format(&s.beta_sum()),
        "exact_measure": scalar::format(&c.exact_measure),
        "branches": c.transformation.branch_count(),
        "f": pieces(&f),
        "g": pieces(&c.transfer),
        "heights": s.stages.iter().map(|st| st.towers.iter().map(|t| t.height()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
    .to_string())
}

/// `μ{|S_n f| ≤ m}` for `n = 1..=n_max` under rotation by `alpha`.
pub fn birkhoff_profile_json(f: &str, alpha: &str, m: &str, n_max: u32) -> Result<String, String> {
    let f: StepFunction = serde_json::from_str(f).map_err(|e| format!("f: {e}"))?;
    let t = PiecewiseTranslation::rotation(&rational(alpha, "alpha")?).map_err(|e| format!("alpha: {e}"))?;
    if n_max == 0 || n_max > 500 {
        return Err("n_max: between 1 and 500".into());
    }
    let profile = schmidt_profile(&f, &t, &rational(m, "m")?, n_max.into()).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = profile
        .iter()
        .map(|(n, v)| json!({ "n": n, "measure_le": scalar::format(v), "approx": scalar::to_f64(v) }))
        .collect();
    Ok(json!({ "integral": scalar::format(&f.integral_total()), "rows": rows }).to_string())
}

/// The two towers for `f = b` on `[0, c/(b+c))` and `−c` on the rest.
pub fn two_step_towers_json(b: &str, c: &str, epsilon: &str, min_height: usize) -> Result<String, String> {
    let (b, c) = (rational(b, "b")?, rational(c, "c")?);
    if b <= int(0) || c <= int(0) {
        return Err("b and c must be positive".into());
    }
    let x = &c / (&b + &c);
    let left = IntervalSet::from(Interval::new(int(0), x).map_err(|e| e.to_string())?);
    let f = StepFunction::from_sets([(left.clone(), b), (left.complement(), -c)]).map_err(|e| e.to_string())?;
    let pair = build_two_step_towers(&f, &IntervalSet::unit(), min_height, &rational(epsilon, "epsilon")?)
        .map_err(|e| e.to_string())?;
    let towers: Vec<Value> = pair
        .towers
        .iter()
        .zip(&pair.full_sums)
        .map(|(t, s)| {
            let levels: Vec<Value> = t
                .levels()
                .iter()
                .map(|l| json!({ "spans": spans(l), "value": scalar::to_f64(&f.value_at(l.first_lo().unwrap())) }))
                .collect();
            json!({ "height": t.height(), "full_sum": scalar::format(s), "levels": levels })
        })
        .collect();
    Ok(json!({ "towers": towers, "counts": pair.counts }).to_string())
}

#[wasm_bindgen]
pub fn construct_transfer(f: &str, delta: &str, stages: usize) -> Result<String, JsValue> {
    construct_transfer_json(f, delta, stages).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn birkhoff_profile(f: &str, alpha: &str, m: &str, n_max: u32) -> Result<String, JsValue> {
    birkhoff_profile_json(f, alpha, m, n_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn two_step_towers(b: &str, c: &str, epsilon: &str, min_height: usize) -> Result<String, JsValue> {
    two_step_towers_json(b, c, epsilon, min_height).map_err(|e| JsValue::from_str(&e))
}
