use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::analysis::growth::GrowthSequence;
use crate::analysis::spec::{AuditEntry, CounterexampleSpec, Family, Parameters};
use crate::measure::{IntervalSet, StepFunction};
use crate::numeric::{pow_bracket, Magnitude, MagnitudeBracket, DEFAULT_BITS};
use crate::scalar::{self, Scalar};
use crate::Error;

/// Largest binary exponent expanded into a plain rational (`a_10 = 2^{10!}` fits).
pub const MAX_EXPANDED_BITS: u64 = 1 << 22;

fn int_exponent(p: &Scalar) -> Result<u32, Error> {
    scalar::as_small_integer(p)
        .and_then(|k| u32::try_from(k).ok())
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::ExponentNotRepresentable(format!("p = {} must be a positive integer here", scalar::format(p))))
}

fn mag_gt(x: &Scalar, m: &Magnitude) -> bool {
    x.is_positive() && Magnitude::from_scalar(x) > *m
}

fn mag_lt(x: &Scalar, m: &Magnitude) -> bool {
    !x.is_positive() || Magnitude::from_scalar(x) < *m
}

fn square(i: u64) -> Scalar {
    Scalar::from_integer((i * i).into())
}

/// `1/(a^p i²)` as a bracket.
fn threshold(a: &Magnitude, p: &Scalar, i: u64) -> MagnitudeBracket {
    a.pow(p, DEFAULT_BITS).recip().scale(&square(i).recip())
}

/// One index of the 𝒢^p test, compared conservatively against the bracket ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GpRow {
    pub i: u64,
    /// `μ{f > a_i}`.
    #[serde(with = "scalar::serde_text")]
    pub v_measure: Scalar,
    /// Upper end of `1/(a_i^p i²)`.
    pub v_threshold: String,
    /// `μ{f < −a_{i−1}}`.
    #[serde(with = "scalar::serde_text")]
    pub u_measure: Scalar,
    /// Lower end of `1/(a_{i+1}^p i²)`.
    pub u_threshold: String,
    pub pass: bool,
}

pub fn gp_row(f: &StepFunction, p: &Scalar, i: u64, a: &GrowthSequence) -> Result<GpRow, Error> {
    if i < 2 {
        return Err(Error::InvalidInput("the 𝒢^p test needs i ≥ 2".into()));
    }
    if !p.is_positive() {
        return Err(Error::InvalidInput("p must be positive".into()));
    }
    let (below, at, above) = (a.value(i - 1)?, a.value(i)?, a.value(i + 1)?);
    let v_measure = f.where_value(|v| mag_gt(v, &at)).measure();
    let u_measure = f.where_value(|v| mag_gt(&-v, &below)).measure();
    let tv = threshold(&at, p, i).hi;
    let tu = threshold(&above, p, i).lo;
    let pass = mag_gt(&v_measure, &tv) && mag_lt(&u_measure, &tu);
    Ok(GpRow {
        i,
        v_measure,
        v_threshold: tv.to_string(),
        u_measure,
        u_threshold: tu.to_string(),
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GpMembership {
    /// Smallest passing `i ∈ (n, i_max]`.
    pub witness: Option<u64>,
    pub rows: Vec<GpRow>,
}

/// Tests `f ∈ 𝒢^p_n` over the witnesses `i ∈ (n, i_max]`.
pub fn gp_membership(f: &StepFunction, p: &Scalar, n: u64, a: &GrowthSequence, i_max: u64) -> Result<GpMembership, Error> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let rows = ((n + 1)..=i_max).map(|i| gp_row(f, p, i, a)).collect::<Result<Vec<_>, _>>()?;
    let witness = rows.iter().find(|r| r.pass).map(|r| r.i);
    Ok(GpMembership { witness, rows })
}

/// Positional cut of a mean-zero set `Y` of measure `m` out of `f`'s level sets.
/// Prefers the zero set; otherwise balances one positive and one negative level.
fn carve_balanced(f: &StepFunction, m: &Scalar) -> Result<IntervalSet, Error> {
    let zero = f.where_value(Zero::is_zero);
    if zero.measure() >= *m {
        return Ok(zero.split_at_measure(m).0);
    }
    let values = f.distinct_values();
    for a in values.iter().filter(|v| v.is_positive()) {
        let pos = f.where_value(|v| v == a);
        for b in values.iter().filter(|v| v.is_negative()) {
            let neg = f.where_value(|v| v == b);
            // a·y_p + b·y_n = 0, y_p + y_n = m.
            let y_p = m * (-b) / (a - b);
            let y_n = m - &y_p;
            if y_p <= pos.measure() && y_n <= neg.measure() {
                return Ok(pos.split_at_measure(&y_p).0.union(&neg.split_at_measure(&y_n).0));
            }
        }
    }
    Err(Error::InfeasibleEpsilon(format!(
        "no mean-zero set of measure {} fits inside one level pair or the zero set",
        scalar::format(m)
    )))
}

/// Plants a spike `2a_{i₁}` on a tiny `V` and a dip `−a_{i₁−1}` on `U` inside a
/// mean-zero `Y`, giving `f₁ ∈ 𝒢^p_n` within `ε` of `f` in `L^p`. Integer `p`.
pub fn gp_densify(f: &StepFunction, p: &Scalar, n: u64, epsilon: &Scalar, a: &GrowthSequence) -> Result<CounterexampleSpec, Error> {
    let pk = int_exponent(p)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    if !epsilon.is_positive() {
        return Err(Error::InvalidInput("ε must be positive".into()));
    }
    if !f.integral_total().is_zero() {
        return Err(Error::UnbalancedInput("f must have mean zero".into()));
    }
    let sup = Magnitude::from_scalar(&scalar::max(&f.sup_norm(), &Scalar::one()));
    let sup_is_zero = f.is_zero();
    let mut i0 = n;
    while !(sup_is_zero || a.value(i0)? > sup) {
        i0 += 1;
    }
    let third = epsilon / scalar::int(3);
    let budget = scalar::pow2(pk as u64 + 2);
    let mut i1 = (i0 + 1).max(n + 1);
    while &budget / square(i1) >= third {
        i1 += 1;
    }
    let expand = |i| a.value_scalar(i, MAX_EXPANDED_BITS);
    let (top, below) = (expand(i1)?, expand(i1 - 1)?);
    let top_p = scalar::powi(&top, pk as i64);
    let i2 = square(i1);
    let mu_v = scalar::int(2) / (&top_p * &i2);
    let mu_u = scalar::int(4) / (&below * scalar::powi(&top, pk as i64 - 1) * &i2);
    let y = carve_balanced(f, &(&mu_v + &mu_u))?;
    let (v, u) = y.split_at_measure(&mu_v);
    let spike = &top * scalar::int(2);
    let f1 = f
        .restrict(&y.complement())
        .add(&StepFunction::constant_on(&v, spike.clone()))
        .add(&StepFunction::constant_on(&u, -below.clone()));

    let mut audit = vec![
        AuditEntry::new("y_mean_zero", scalar::format(&f.integral(&y)), f.integral(&y).is_zero()),
        AuditEntry::new("f1_mean_zero", scalar::format(&f1.integral_total()), f1.integral_total().is_zero()),
        AuditEntry::new(
            "i1_rule",
            format!("2^(p+2)/i1^2 = {} < eps/3 = {}", scalar::format(&(&budget / &i2)), scalar::format(&third)),
            &budget / &i2 < third,
        ),
    ];
    let t2 = scalar::pow2(pk as u64) * &top_p * &mu_v;
    let t3 = scalar::powi(&below, pk as i64) * &mu_u;
    let bound = &third + &t2 + &t3;
    audit.push(AuditEntry::new(
        "triangle_bound",
        format!(
            "eps/3 + 2^p a^p mu(V) + a'^p mu(U) = {} + {} + {} = {}",
            scalar::format(&third),
            scalar::format(&t2),
            scalar::format(&t3),
            scalar::format(&bound)
        ),
        &bound < epsilon,
    ));
    let dist = f.sub(&f1).abs_power_integral(pk);
    let eps_p = scalar::powi(epsilon, pk as i64);
    audit.push(AuditEntry::new(
        "p_distance",
        format!("||f - f1||_p^p = {} < eps^p = {}", scalar::format(&dist), scalar::format(&eps_p)),
        dist < eps_p,
    ));
    let row = gp_row(&f1, p, i1, a)?;
    audit.push(AuditEntry::new(
        "membership_at_i1",
        format!("mu(v) = {} > {}; mu(u) = {} < {}", scalar::format(&row.v_measure), row.v_threshold, scalar::format(&row.u_measure), row.u_threshold),
        row.pass && i1 > n,
    ));

    Ok(CounterexampleSpec {
        family: Family::GenericGp,
        parameters: Parameters::GenericGp {
            p: p.clone(),
            n,
            epsilon: epsilon.clone(),
            i0,
            i1,
            v,
            u,
        },
        function: f1,
        audit,
    })
}

/// Witness data `(i, a′, a″, μ′, ν′)` for the openness radius.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpennessWitness {
    pub i: u64,
    #[serde(with = "scalar::serde_text")]
    pub a_prime: Scalar,
    #[serde(with = "scalar::serde_text")]
    pub a_second: Scalar,
    #[serde(with = "scalar::serde_text")]
    pub mu_prime: Scalar,
    #[serde(with = "scalar::serde_text")]
    pub nu_prime: Scalar,
}

struct Thresholds {
    below: Scalar,
    at: Scalar,
    tv: Scalar,
    tu: Scalar,
}

fn exact_thresholds(pk: u32, i: u64, a: &GrowthSequence) -> Result<Thresholds, Error> {
    if i < 2 {
        return Err(Error::InvalidWitness("i must be at least 2".into()));
    }
    let expand = |j| a.value_scalar(j, MAX_EXPANDED_BITS);
    let (below, at, above) = (expand(i - 1)?, expand(i)?, expand(i + 1)?);
    let tv = (scalar::powi(&at, pk as i64) * square(i)).recip();
    let tu = (scalar::powi(&above, pk as i64) * square(i)).recip();
    Ok(Thresholds { below, at, tv, tu })
}

/// Midpoint witness: `a′` halfway to the next value above `a_i`, `μ′` halfway
/// between `μ(v_i)` and its threshold, `a″ = 2a_{i−1}` and `ν′` halfway
/// between `μ{f < −a″}` and its threshold.
pub fn default_witness(f: &StepFunction, p: &Scalar, i: u64, a: &GrowthSequence) -> Result<OpennessWitness, Error> {
    let th = exact_thresholds(int_exponent(p)?, i, a)?;
    let half = scalar::ratio(1, 2);
    let next = f
        .distinct_values()
        .into_iter()
        .find(|v| *v > th.at)
        .ok_or_else(|| Error::InvalidWitness(format!("f never exceeds a_{i}")))?;
    let a_prime = (&th.at + &next) * &half;
    let a_second = &th.below * scalar::int(2);
    let v = f.where_value(|x| *x > a_prime).measure();
    let deep = f.where_value(|x| *x < -a_second.clone()).measure();
    Ok(OpennessWitness {
        i,
        mu_prime: (&v + &th.tv) * &half,
        nu_prime: (&deep + &th.tu) * &half,
        a_prime,
        a_second,
    })
}

/// `min{(μ′ − 1/(a_i^p i²))(a′ − a_i)^p, (1/(a_{i+1}^p i²) − ν′)(a″ − a_{i−1})^p}`:
/// every `h` with `‖f − h‖_p^p` below it stays in `𝒢^p_n`.
pub fn gp_openness_radius(f: &StepFunction, p: &Scalar, w: &OpennessWitness, a: &GrowthSequence) -> Result<Scalar, Error> {
    let pk = int_exponent(p)?;
    let th = exact_thresholds(pk, w.i, a)?;
    let bad = |m: &str| Err(Error::InvalidWitness(m.into()));
    if w.a_prime <= th.at {
        return bad("a′ must exceed a_i");
    }
    if w.a_second <= th.below {
        return bad("a″ must exceed a_{i−1}");
    }
    let v = f.where_value(|x| *x > w.a_prime).measure();
    if !(v > w.mu_prime && w.mu_prime > th.tv) {
        return bad("need μ{f > a′} > μ′ > 1/(a_i^p i²)");
    }
    let deep = f.where_value(|x| *x < -w.a_second.clone()).measure();
    if !(deep < w.nu_prime && w.nu_prime < th.tu) {
        return bad("need μ{f < −a″} < ν′ < 1/(a_{i+1}^p i²)");
    }
    let first = (&w.mu_prime - &th.tv) * scalar::powi(&(&w.a_prime - &th.at), pk as i64);
    let second = (&th.tu - &w.nu_prime) * scalar::powi(&(&w.a_second - &th.below), pk as i64);
    Ok(scalar::min(&first, &second))
}

/// Which final display of the growth estimate to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundCase {
    /// `a_n^{q+1−p} / (32·4^q·a_{n−1}·n²)`.
    One,
    /// `a_n^{kq−p} / (32·n²·4^q·a_{n−1}^{q(k−1)})`, `k > 1` least with `kq > p`.
    Two,
}

/// Smallest integer `k > 1` with `kq > p`.
pub fn case_two_k(p: &Scalar, q: &Scalar) -> u64 {
    let k: num_bigint::BigInt = (p / q).floor().to_integer() + 1;
    k.to_u64().unwrap_or(u64::MAX).max(2)
}

/// Lower bound on `∫|g|^q` over the `n`-th block; diverges with `n`.
pub fn core_lower_bound(p: &Scalar, q: &Scalar, n: u64, a: &GrowthSequence, case: BoundCase) -> Result<MagnitudeBracket, Error> {
    if !p.is_positive() || !q.is_positive() {
        return Err(Error::InvalidExponents("p and q must be positive".into()));
    }
    if *q <= p - Scalar::one() {
        return Err(Error::InvalidExponents(format!("need q > p − 1, got p = {}, q = {}", scalar::format(p), scalar::format(q))));
    }
    if n < 2 {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let (an, prev) = (a.value(n)?, a.value(n - 1)?);
    let four_q = pow_bracket(&scalar::int(4), q, DEFAULT_BITS);
    let four_q = MagnitudeBracket {
        lo: Magnitude::from_scalar(&four_q.lo),
        hi: Magnitude::from_scalar(&four_q.hi),
    };
    let (num, den) = match case {
        BoundCase::One => (an.pow(&(q + Scalar::one() - p), DEFAULT_BITS), prev.pow(&Scalar::one(), DEFAULT_BITS)),
        BoundCase::Two => {
            let k = Scalar::from_integer(case_two_k(p, q).into());
            (an.pow(&(&k * q - p), DEFAULT_BITS), prev.pow(&(q * (k - Scalar::one())), DEFAULT_BITS))
        }
    };
    let scale = (scalar::int(32) * square(n)).recip();
    Ok(num.div(&four_q.mul(&den)).scale(&scale))
}
