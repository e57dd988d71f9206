use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::measure::{Interval, IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::solver::bounded::{construct_bounded_on, BoundedOptions};
use crate::solver::extend::{extend_coboundary, induced_function};
use crate::solver::verify::{verify, SolutionCertificate};
use crate::towers::{decompose_bounded, Tower};
use crate::Error;

/// One band `X′ ∪ Y′`: positive values in `(k−1, k]`, negative in `[−ℓ, 1−ℓ)`,
/// with cancelling integrals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Band {
    pub index: usize,
    pub k: u64,
    pub l: u64,
    pub m: u64,
    #[serde(with = "scalar::serde_text")]
    pub epsilon: Scalar,
    #[serde(with = "scalar::serde_text")]
    pub delta: Scalar,
    pub positive: IntervalSet,
    pub negative: IntervalSet,
    /// `sup |g|` on the band.
    #[serde(with = "scalar::serde_text")]
    pub sup_transfer: Scalar,
    /// `m + ε`, which the supremum must stay below.
    #[serde(with = "scalar::serde_text")]
    pub bound: Scalar,
    /// `∫ |g|^{p−1}` over the band.
    #[serde(with = "scalar::serde_text")]
    pub integral: Scalar,
}

impl Band {
    pub fn carrier(&self) -> IntervalSet {
        self.positive.union(&self.negative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LpReport {
    pub p: u32,
    pub bands: Vec<Band>,
    /// True when the positive side reaches the larger band.
    pub positive_dominant: bool,
    /// First band (1-based) whose dominant index is at least the other one.
    pub j: usize,
    #[serde(with = "scalar::serde_text")]
    pub l_j: Scalar,
    /// `∫ |g|^{p−1}` over all bands.
    #[serde(with = "scalar::serde_text")]
    pub lhs_total: Scalar,
    /// The same over bands after `j`.
    #[serde(with = "scalar::serde_text")]
    pub lhs_tail: Scalar,
    /// `2^{p−1}‖f‖_{p−1}^{p−1} + (2^p/ℓ_j)‖f‖_p^p`.
    #[serde(with = "scalar::serde_text")]
    pub rhs: Scalar,
    pub total_holds: bool,
    pub tail_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub certificate: SolutionCertificate,
    pub report: LpReport,
}

fn ceil_u64(x: &Scalar) -> Result<u64, Error> {
    x.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidInput(format!("value {} too large for a band index", scalar::format(x))))
}

/// Splits `set` (inside a one-signed region of `f`) into a positional prefix
/// carrying `|∫ f| = amount` and the rest.
fn carve(f: &StepFunction, set: &IntervalSet, amount: &Scalar) -> (IntervalSet, IntervalSet) {
    let mut left = amount.clone();
    let mut taken = Vec::new();
    for (iv, v) in f.restrict(set).pieces() {
        if left.is_zero() {
            break;
        }
        let mass = iv.measure() * v.abs();
        if mass <= left {
            left -= &mass;
            taken.push(iv.clone());
        } else {
            let cut = iv.lo() + &left / v.abs();
            taken.push(Interval::new(iv.lo().clone(), cut).expect("inside the piece"));
            left = Scalar::zero();
        }
    }
    let taken = IntervalSet::from_intervals(taken);
    let rest = set.difference(&taken);
    (taken, rest)
}

/// Integer bands of one sign, ascending: `{c−1 < |f| ≤ c}` on that side.
fn sign_bands(f: &StepFunction, positive: bool) -> Result<Vec<(u64, IntervalSet)>, Error> {
    let mut out: Vec<(u64, Vec<Interval>)> = Vec::new();
    let mut pieces: Vec<(u64, Interval)> = Vec::new();
    for (iv, v) in f.pieces() {
        if v.is_positive() == positive {
            pieces.push((ceil_u64(&v.abs())?, iv.clone()));
        }
    }
    pieces.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.lo().cmp(b.1.lo())));
    for (c, iv) in pieces {
        match out.last_mut() {
            Some((k, v)) if *k == c => v.push(iv),
            _ => out.push((c, vec![iv])),
        }
    }
    Ok(out.into_iter().map(|(c, v)| (c, IntervalSet::from_intervals(v))).collect())
}

/// Pairs positive and negative bands in order, carving prefixes so each pair
/// has zero integral. Returns `(k, ℓ, X′, Y′)`.
pub fn band_split(f: &StepFunction) -> Result<Vec<(u64, u64, IntervalSet, IntervalSet)>, Error> {
    let total = f.integral_total();
    if !total.is_zero() {
        return Err(Error::UnbalancedInput(scalar::format(&total)));
    }
    let mut pos = sign_bands(f, true)?;
    let mut neg = sign_bands(f, false)?;
    let mass = |s: &IntervalSet| f.integral(s).abs();
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < pos.len() && j < neg.len() {
        let amount = scalar::min(&mass(&pos[i].1), &mass(&neg[j].1));
        let (x, xr) = carve(f, &pos[i].1, &amount);
        let (y, yr) = carve(f, &neg[j].1, &amount);
        out.push((pos[i].0, neg[j].0, x, y));
        pos[i].1 = xr;
        neg[j].1 = yr;
        if pos[i].1.is_empty() {
            i += 1;
        }
        if neg[j].1.is_empty() {
            j += 1;
        }
    }
    Ok(out)
}

/// Transfer function in `L^{p−1}` for a mean-zero step function, band by band.
///
/// Each band gets tolerance `ε_i = δ/2^{i+1}` and inner tolerance
/// `δ_i = ε_i / (2(m_i + ε_i))`. Its two-valued pieces are stacked into
/// towers, the bottom-to-top sums are solved on the bases, and the solution is
/// lifted back up the towers. Points where `f = 0` are fixed.
pub fn construct_lp_solution(
    f: &StepFunction,
    p: u32,
    delta: &Scalar,
    stages: usize,
    options: &BoundedOptions,
) -> Result<LpSolution, Error> {
    if p < 1 {
        return Err(Error::InvalidExponents("p must be at least 1".into()));
    }
    if delta <= &Scalar::zero() {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    let split = band_split(f)?;
    let mut branches = PiecewiseTranslation::identity(&f.support().complement()).branches().to_vec();
    let mut g = StepFunction::zero();
    let mut bands = Vec::with_capacity(split.len());
    for (n, (k, l, x, y)) in split.into_iter().enumerate() {
        let index = n + 1;
        let epsilon = delta / scalar::pow2(index as u64 + 1);
        let m = k.max(l);
        let ms = Scalar::from_integer(BigInt::from(m));
        let band_delta = &epsilon / (Scalar::from_integer(2.into()) * (&ms + &epsilon));
        let carrier = x.union(&y);
        let local = f.restrict(&carrier);
        let parts = local.distinct_values().len().max(1);
        let towers: Vec<Tower> = decompose_bounded(&local, &vec![&epsilon / Scalar::from_integer(2.into()); parts])?;
        let bases = IntervalSet::union_all(towers.iter().map(Tower::base));
        let f_a = induced_function(&local, &towers);
        let base = construct_bounded_on(&f_a, &bases, &band_delta, stages, options)?;
        let (t, gi) = extend_coboundary(&local, &towers, &base.certificate.transformation, &base.certificate.transfer)?;
        let bound = &ms + &epsilon;
        let sup = gi.sup_norm();
        if sup >= bound {
            return Err(Error::ConstructionFailed(format!("band {index}: sup |g| = {} reaches m + ε", scalar::format(&sup))));
        }
        branches.extend(t.branches().iter().cloned());
        let integral = gi.restrict(&carrier).abs_power_integral(p - 1);
        g = g.add(&gi);
        bands.push(Band {
            index,
            k,
            l,
            m,
            epsilon,
            delta: band_delta,
            positive: x,
            negative: y,
            sup_transfer: sup,
            bound,
            integral,
        });
    }
    let t = PiecewiseTranslation::new(branches)?;
    let certificate = verify(f, &t, &g)?.certificate;
    let report = chain_report(f, p, bands);
    Ok(LpSolution { certificate, report })
}

fn chain_report(f: &StepFunction, p: u32, bands: Vec<Band>) -> LpReport {
    let max_k = bands.iter().map(|b| b.k).max().unwrap_or(0);
    let max_l = bands.iter().map(|b| b.l).max().unwrap_or(0);
    let positive_dominant = max_k >= max_l;
    let orient = |b: &Band| if positive_dominant { (b.k, b.l) } else { (b.l, b.k) };
    let j = bands.iter().position(|b| {
        let (d, s) = orient(b);
        d >= s
    });
    let (j, l_j) = match j {
        Some(j) => (j + 1, Scalar::from_integer(BigInt::from(orient(&bands[j]).1))),
        None => (0, Scalar::one()),
    };
    let lhs_total: Scalar = bands.iter().map(|b| b.integral.clone()).sum();
    let lhs_tail: Scalar = bands.iter().skip(j).map(|b| b.integral.clone()).sum();
    let rhs = if bands.is_empty() {
        Scalar::zero()
    } else {
        scalar::pow2(p as u64 - 1) * f.abs_power_integral(p - 1)
            + scalar::pow2(p as u64) / &l_j * f.abs_power_integral(p)
    };
    LpReport {
        p,
        total_holds: lhs_total <= rhs,
        tail_holds: lhs_tail <= rhs,
        bands,
        positive_dominant,
        j,
        l_j,
        lhs_total,
        lhs_tail,
        rhs,
    }
}
