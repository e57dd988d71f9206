use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::analysis::generic::MAX_EXPANDED_BITS;
use crate::analysis::growth::factorial;
use crate::analysis::spec::{AuditEntry, CounterexampleSpec, Family, Parameters};
use crate::measure::{Interval, IntervalSet, StepFunction};
use crate::numeric::{pow_bracket, Bracket, Magnitude, DEFAULT_BITS};
use crate::scalar::{self, Scalar};
use crate::Error;

/// `(2^e, e)` for `e = 0..=max_exp`: the table of `φ = log₂`.
pub fn log2_table(max_exp: u64) -> Vec<(Scalar, Scalar)> {
    (0..=max_exp).map(|e| (scalar::pow2(e), Scalar::from_integer(e.into()))).collect()
}

fn consecutive(start: &Scalar, measures: &[Scalar]) -> Result<Vec<IntervalSet>, Error> {
    let mut lo = start.clone();
    let mut out = Vec::with_capacity(measures.len());
    for m in measures {
        let hi = &lo + m;
        out.push(IntervalSet::from(Interval::new(lo, hi.clone())?));
        lo = hi;
    }
    if lo > Scalar::one() {
        return Err(Error::InvalidInput("the sets do not fit in [0,1)".into()));
    }
    Ok(out)
}

/// Whether `φ(y) ≥ need` for all `y ≥ from`, read off a table assumed
/// nondecreasing past its last entry: some entry at or below `from` must start
/// a suffix that stays at least `need`.
fn table_bound(table: &[(Scalar, Scalar)], suffix_min: &[Scalar], from: &Magnitude, need: &Scalar) -> Option<usize> {
    table
        .iter()
        .enumerate()
        .take_while(|(_, (y, _))| Magnitude::from_scalar(y) <= *from)
        .filter(|(j, _)| suffix_min[*j] >= *need)
        .map(|(j, _)| j)
        .last()
}

/// `f = I_A − Σ_{i ≤ depth} b_i I_{B_i}` with `μ(A) = 1/2`, `μ(B_i) = 1/(b_i 2^{i+1})`
/// and `b_i = 2^{(i+s)!}` for the least shift `s` that makes `φ(y) ≥ i·2^i`
/// for `y ≥ b_i/4` against the table.
pub fn not_a_moment_generate(phi_table: &[(Scalar, Scalar)], depth: u32) -> Result<CounterexampleSpec, Error> {
    if phi_table.iter().any(|(y, _)| !y.is_positive()) {
        return Err(Error::InvalidInput("table points must be positive".into()));
    }
    if phi_table.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidInput("table points must be strictly increasing".into()));
    }
    let mut suffix_min = vec![Scalar::zero(); phi_table.len()];
    for j in (0..phi_table.len()).rev() {
        suffix_min[j] = match suffix_min.get(j + 1) {
            Some(m) if j + 1 < phi_table.len() => scalar::min(m, &phi_table[j].1),
            _ => phi_table[j].1.clone(),
        };
    }
    let last_y = phi_table.last().map(|(y, _)| Magnitude::from_scalar(y));
    let quarter = |i: u64, s: u64| Magnitude::pow2(factorial(i + s) - 2);
    let need = |i: u64| Scalar::from_integer(BigInt::from(i) << i as usize);

    let mut shift = 0u64;
    let hits = 'search: loop {
        let mut hits = Vec::new();
        for i in 1..=depth as u64 {
            match table_bound(phi_table, &suffix_min, &quarter(i, shift), &need(i)) {
                Some(j) => hits.push(j),
                None => {
                    // Past the table end a larger shift cannot help.
                    if last_y.as_ref().is_none_or(|y| quarter(i, shift) >= *y) {
                        return Err(Error::TableTooShort(format!("φ never reaches {} = {i}·2^{i} on the table", need(i))));
                    }
                    shift += 1;
                    continue 'search;
                }
            }
        }
        break hits;
    };

    let b_log2: Vec<BigInt> = (1..=depth as u64).map(|i| factorial(i + shift)).collect();
    if b_log2.last().is_some_and(|e| e.to_u64().is_none_or(|e| e > MAX_EXPANDED_BITS)) {
        return Err(Error::ExponentNotRepresentable("b_depth is too large to expand".into()));
    }
    let b: Vec<Scalar> = b_log2.iter().map(|e| scalar::pow2(e.to_u64().expect("checked"))).collect();
    let half = scalar::ratio(1, 2);
    let mu_b: Vec<Scalar> = b
        .iter()
        .enumerate()
        .map(|(k, bi)| (bi * scalar::pow2(k as u64 + 2)).recip())
        .collect();
    let a_set = IntervalSet::from(Interval::new(Scalar::zero(), half.clone())?);
    let b_sets = consecutive(&half, &mu_b)?;
    let mut f = StepFunction::indicator(&a_set);
    for (set, bi) in b_sets.iter().zip(&b) {
        f = f.sub(&StepFunction::constant_on(set, bi.clone()));
    }

    let mut audit = Vec::new();
    let ratios: Vec<BigInt> = b_log2.windows(2).map(|w| &w[1] / &w[0]).collect();
    let growing = ratios.windows(2).all(|w| w[0] < w[1]) && ratios.iter().all(|r| *r > BigInt::one());
    audit.push(AuditEntry::new(
        "log_ratio_increasing",
        format!("log2 b_(i+1) / log2 b_i = {:?}", ratios.iter().map(|r| r.to_string()).collect::<Vec<_>>()),
        growing,
    ));
    for (k, j) in hits.iter().enumerate() {
        let i = k as u64 + 1;
        let (y, phi) = &phi_table[*j];
        audit.push(AuditEntry::new(
            format!("phi_growth_{i}"),
            format!("phi >= {} from y = {} <= b_{i}/4 = 2^{}", scalar::format(phi), y, &b_log2[k] - 2),
            true,
        ));
    }
    for (k, (bi, m)) in b.iter().zip(&mu_b).enumerate() {
        let i = k as u64 + 1;
        let product = bi * m * scalar::pow2(i + 1);
        audit.push(AuditEntry::new(format!("set_measure_{i}"), format!("mu(B_{i}) b_{i} 2^{} = {}", i + 1, scalar::format(&product)), product.is_one()));
    }
    let abs = f.abs_power_integral(1);
    audit.push(AuditEntry::new("abs_integral", scalar::format(&abs), abs < Scalar::one()));
    let tail = scalar::pow2(depth as u64 + 1).recip();
    let defect = f.integral_total();
    audit.push(AuditEntry::new(
        "tail_mass",
        format!("sum_(i>{depth}) 2^-(i+1) = {}; truncation defect = {}", scalar::format(&tail), scalar::format(&defect)),
        defect == tail,
    ));

    Ok(CounterexampleSpec {
        family: Family::NotAMoment,
        parameters: Parameters::NotAMoment {
            depth,
            shift,
            b_log2: b_log2.iter().map(ToString::to_string).collect(),
            a: a_set,
            b: b_sets,
            tail_mass: tail,
        },
        function: f,
        audit,
    })
}

fn exponent_ok(e: &Scalar) -> Result<(), Error> {
    if e.numer().to_i64().is_none() || e.denom().to_u32().is_none() {
        return Err(Error::ExponentNotRepresentable(format!("exponent {} is too large", scalar::format(e))));
    }
    Ok(())
}

fn pow(x: &Scalar, e: &Scalar) -> Bracket {
    pow_bracket(x, e, DEFAULT_BITS)
}

/// `(1 + r − p) / (2(r + 1))`.
pub fn kwapien_delta(p: &Scalar, r: &Scalar) -> Scalar {
    (Scalar::one() + r - p) / (scalar::int(2) * (r + Scalar::one()))
}

/// Relative width allowed on any audited bracket.
pub fn audit_tolerance() -> Scalar {
    scalar::ratio(1, 1_000_000)
}

/// `f = Σ_k 2N_k^{1−δ} I_{E_k} − I_{E_0}` with `μ(E_k) = N_k^{−p}` and
/// `μ(E_0) = ∫f⁺`. Irrational powers are rounded so each audited inequality
/// can only fail spuriously: spike heights up, set measures down.
pub fn kwapien_generate(p: &Scalar, r: &Scalar, n_table: &[BigInt], depth: u32) -> Result<CounterexampleSpec, Error> {
    if *p < scalar::int(2) {
        return Err(Error::InvalidInput("p must be at least 2".into()));
    }
    if *r <= p - Scalar::one() {
        return Err(Error::InvalidInput("r must exceed p − 1".into()));
    }
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be positive".into()));
    }
    if n_table.len() < depth as usize {
        return Err(Error::TableTooShort(format!("{} values of N_k for depth {depth}", n_table.len())));
    }
    let ns: Vec<Scalar> = n_table[..depth as usize].iter().map(|n| Scalar::from_integer(n.clone())).collect();
    if ns.iter().any(|n| *n <= Scalar::one()) {
        return Err(Error::InvalidInput("every N_k must exceed 1".into()));
    }
    let delta = kwapien_delta(p, r);
    let one = Scalar::one();
    let lk_exp = (&one + r - p) / scalar::int(2);
    for e in [&delta, p, r, &lk_exp, &(&one - &delta), &(p + &one)] {
        exponent_ok(e)?;
    }
    let tol = audit_tolerance();
    let mut audit = vec![AuditEntry::new("delta", scalar::format(&delta), delta.is_positive())];

    let tail_sum = ns.iter().fold(Bracket::exact(Scalar::zero()), |acc, n| acc.add(&pow(n, &-delta.clone())));
    let limit = pow(&scalar::int(2), &(p + &one));
    // Σ N_k^{−δ} < 1/2^{p+1}, certified with the upper sum and the lower limit.
    let summable = &tail_sum.hi * &limit.hi < one;
    let summability = format!("sum N_k^-delta in {tail_sum}, need < 1/2^(p+1) with 2^(p+1) = {limit}");
    if !summable {
        return Err(Error::Eqn2Violated(summability));
    }
    audit.push(AuditEntry::new("summability_prefix", summability, tail_sum.relative_width() <= tol));

    let heights: Vec<Bracket> = ns.iter().map(|n| pow(n, &(&one - &delta))).collect();
    let values: Vec<Scalar> = heights.iter().map(|h| &h.hi * scalar::int(2)).collect();
    let measures: Vec<Scalar> = ns.iter().map(|n| pow(n, &-p.clone()).lo).collect();
    let plus: Scalar = values.iter().zip(&measures).map(|(v, m)| v * m).sum();
    let mut all = measures.clone();
    all.push(plus.clone());
    let sets = consecutive(&Scalar::zero(), &all)?;
    let (e_sets, e0) = (&sets[..depth as usize], sets[depth as usize].clone());
    let mut f = StepFunction::zero();
    for (set, v) in e_sets.iter().zip(&values) {
        f = f.add(&StepFunction::constant_on(set, v.clone()));
    }
    f = f.sub(&StepFunction::indicator(&e0));

    let half = scalar::ratio(1, 2);
    audit.push(AuditEntry::new("positive_integral", format!("{} < 1/2", scalar::format(&plus)), plus < half));
    audit.push(AuditEntry::new("mean_zero", scalar::format(&f.integral_total()), f.integral_total().is_zero()));

    for (k, (n, h)) in ns.iter().zip(&heights).enumerate() {
        // Lower bound: smallest n_k in front, largest n_k inside the integrand.
        let mut inner = Bracket::exact(Scalar::zero());
        for (v, m) in values.iter().zip(&measures) {
            if v > &h.hi {
                inner = inner.add(&pow(&(v - &h.hi), r).scale(m));
            }
        }
        let lk = Bracket::exact(h.lo.clone()).mul_nonneg(&inner);
        let target = pow(n, &lk_exp);
        let pass = lk.lo >= target.hi && lk.relative_width() <= tol && target.relative_width() <= tol;
        audit.push(AuditEntry::new(
            format!("L_{}", k + 1),
            format!("L_k >= {} vs N_k^((r+1-p)/2) <= {}", scalar::format(&lk.lo), scalar::format(&target.hi)),
            pass,
        ));
    }

    Ok(CounterexampleSpec {
        family: Family::Kwapien,
        parameters: Parameters::Kwapien {
            p: p.clone(),
            r: r.clone(),
            delta,
            depth,
            n_table: n_table[..depth as usize].iter().map(ToString::to_string).collect(),
            e: e_sets.to_vec(),
            e0,
        },
        function: f,
        audit,
    })
}

/// `N_k = 2^{24k}`: with `p = r = 2` every power in the construction is exact.
pub fn default_n_table(depth: u32) -> Vec<BigInt> {
    (1..=depth as usize).map(|k| BigInt::one() << (24 * k)).collect()
}
