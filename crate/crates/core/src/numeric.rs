//! Certified rational brackets for irrational powers, and power-of-two scaled
//! magnitudes for quantities like `2^(n!)` that are too large to expand.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::{self, Scalar};

/// Default relative precision of brackets, in bits (2^-64 < 10^-19).
pub const DEFAULT_BITS: u32 = 64;

/// A closed rational interval `[lo, hi]` certified to contain a real value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Bracket {
    pub fn exact(x: Scalar) -> Self {
        Bracket {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }

    /// Width relative to the lower end (zero for exact brackets or a zero lower end).
    pub fn relative_width(&self) -> Scalar {
        if self.lo.is_zero() {
            if self.hi.is_zero() {
                Scalar::zero()
            } else {
                self.width()
            }
        } else {
            self.width() / self.lo.abs()
        }
    }

    pub fn add(&self, other: &Bracket) -> Bracket {
        Bracket {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    /// Product with a nonnegative exact factor.
    pub fn scale(&self, k: &Scalar) -> Bracket {
        debug_assert!(!k.is_negative());
        Bracket {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }

    /// Product of two brackets with nonnegative bounds.
    pub fn mul_nonneg(&self, other: &Bracket) -> Bracket {
        Bracket {
            lo: &self.lo * &other.lo,
            hi: &self.hi * &other.hi,
        }
    }

    /// Certainly below `x`.
    pub fn lt(&self, x: &Scalar) -> bool {
        &self.hi < x
    }

    /// Certainly above `x`.
    pub fn gt(&self, x: &Scalar) -> bool {
        &self.lo > x
    }
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", scalar::format(&self.lo))
        } else {
            write!(f, "[{}, {}]", scalar::format(&self.lo), scalar::format(&self.hi))
        }
    }
}

/// Floor of the `t`-th root of a nonnegative rational, scaled by `2^k`:
/// returns `r` with `r <= y^(1/t) * 2^k * den < r + 1` for the chosen denominator.
fn root_bracket(y: &Scalar, t: u32, bits: u32) -> Bracket {
    debug_assert!(!y.is_negative());
    if y.is_zero() || t == 1 {
        return Bracket::exact(y.clone());
    }
    let a = y.numer().clone();
    let b = y.denom().clone();
    // y^(1/t) = (a * b^(t-1))^(1/t) / b
    let m: BigInt = a * num_traits::pow::pow(b.clone(), (t - 1) as usize);
    let root = m.nth_root(t);
    if num_traits::pow::pow(root.clone(), t as usize) == m {
        return Bracket::exact(Scalar::new(root, b));
    }
    let mut k = bits + 2;
    loop {
        let scaled: BigInt = &m << (k as usize * t as usize);
        let r = scaled.nth_root(t);
        let den = &b << k as usize;
        let out = Bracket {
            lo: Scalar::new(r.clone(), den.clone()),
            hi: Scalar::new(r + 1, den),
        };
        if !out.lo.is_zero() && out.relative_width() <= Scalar::new(BigInt::one(), BigInt::one() << bits as usize) {
            return out;
        }
        k += bits;
    }
}

/// Certified bracket for `x^e`, `x >= 0`, `e` rational. Exact when `e` is an
/// integer or when the root happens to be rational.
pub fn pow_bracket(x: &Scalar, e: &Scalar, bits: u32) -> Bracket {
    assert!(!x.is_negative(), "pow_bracket of a negative base");
    if x.is_zero() {
        return Bracket::exact(if e.is_zero() { Scalar::one() } else { Scalar::zero() });
    }
    let s = e.numer().to_i64().expect("exponent numerator out of range");
    let t = e.denom().to_u32().expect("exponent denominator out of range");
    let y = scalar::powi(x, s);
    root_bracket(&y, t, bits)
}

/// Bracket for `2^(u/t)` with `0 <= u < t`.
fn frac_pow2(u: &BigInt, t: &BigInt, bits: u32) -> Bracket {
    if u.is_zero() {
        return Bracket::exact(Scalar::one());
    }
    let e = Scalar::new(u.clone(), t.clone());
    pow_bracket(&scalar::int(2), &e, bits)
}

/// Exact positive value `mantissa * 2^exp2` with an unexpanded binary exponent.
/// Equality and ordering compare values, not representations.
#[derive(Clone, Debug)]
pub struct Magnitude {
    pub mantissa: Scalar,
    pub exp2: BigInt,
}

impl Magnitude {
    pub fn new(mantissa: Scalar, exp2: BigInt) -> Self {
        assert!(mantissa.is_positive(), "magnitudes are positive");
        Magnitude { mantissa, exp2 }
    }

    pub fn from_scalar(x: &Scalar) -> Self {
        Magnitude::new(x.clone(), BigInt::zero())
    }

    pub fn pow2(e: BigInt) -> Self {
        Magnitude::new(Scalar::one(), e)
    }

    pub fn mul(&self, o: &Magnitude) -> Magnitude {
        Magnitude::new(&self.mantissa * &o.mantissa, &self.exp2 + &o.exp2)
    }

    pub fn div(&self, o: &Magnitude) -> Magnitude {
        Magnitude::new(&self.mantissa / &o.mantissa, &self.exp2 - &o.exp2)
    }

    pub fn scale(&self, k: &Scalar) -> Magnitude {
        Magnitude::new(&self.mantissa * k, self.exp2.clone())
    }

    /// Expands to a rational when the exponent is at most `max_bits` in size.
    pub fn to_scalar(&self, max_bits: u64) -> Option<Scalar> {
        let e = self.exp2.to_i64()?;
        if e.unsigned_abs() > max_bits {
            return None;
        }
        Some(&self.mantissa * scalar::powi(&scalar::int(2), e))
    }

    /// Approximate base-2 logarithm for display.
    pub fn log2_approx(&self) -> f64 {
        let n = self.mantissa.numer();
        let d = self.mantissa.denom();
        let lg = |v: &BigInt| -> f64 {
            let bits = v.bits();
            if bits <= 52 {
                v.to_f64().unwrap().log2()
            } else {
                let shift = bits - 52;
                (v >> shift as usize).to_f64().unwrap().log2() + shift as f64
            }
        };
        self.exp2.to_f64().unwrap_or(f64::INFINITY) + lg(n) - lg(d)
    }

    /// Bounds on log2(mantissa) as integers: `lo <= log2 m < hi`.
    fn mantissa_log_bounds(&self) -> (BigInt, BigInt) {
        let nb = self.mantissa.numer().bits() as i64;
        let db = self.mantissa.denom().bits() as i64;
        (BigInt::from(nb - db - 1), BigInt::from(nb - db + 1))
    }

    /// `self^e` for rational `e`, as a certified bracket of magnitudes.
    pub fn pow(&self, e: &Scalar, bits: u32) -> MagnitudeBracket {
        // m^e * 2^(E*e); split E*e = whole + frac/t.
        let t = e.denom().clone();
        let prod = &self.exp2 * e.numer();
        let (whole, frac) = prod.div_mod_floor(&t);
        let two_frac = frac_pow2(&frac, &t, bits);
        let m = pow_bracket(&self.mantissa, e, bits);
        let lo = m.lo.clone() * &two_frac.lo;
        let hi = m.hi.clone() * &two_frac.hi;
        MagnitudeBracket {
            lo: Magnitude::new(lo, whole.clone()),
            hi: Magnitude::new(hi, whole),
        }
    }
}

impl PartialEq for Magnitude {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Magnitude {}

impl PartialOrd for Magnitude {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Magnitude {
    fn cmp(&self, other: &Self) -> Ordering {
        let (alo, ahi) = self.mantissa_log_bounds();
        let (blo, bhi) = other.mantissa_log_bounds();
        if &self.exp2 + &ahi <= &other.exp2 + &blo {
            return Ordering::Less;
        }
        if &other.exp2 + &bhi <= &self.exp2 + &alo {
            return Ordering::Greater;
        }
        // Exponents are within a few mantissa bit-lengths of each other.
        let d = (&self.exp2 - &other.exp2).to_i64().expect("exponent gap overflow");
        let two = scalar::int(2);
        let lhs = &self.mantissa * scalar::powi(&two, d.max(0));
        let rhs = &other.mantissa * scalar::powi(&two, (-d).max(0));
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp2.sign() == Sign::NoSign {
            write!(f, "{}", scalar::format(&self.mantissa))
        } else {
            write!(f, "{}*2^{}", scalar::format(&self.mantissa), self.exp2)
        }
    }
}

/// Certified enclosure `[lo, hi]` of a positive real by magnitudes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnitudeBracket {
    pub lo: Magnitude,
    pub hi: Magnitude,
}

impl MagnitudeBracket {
    pub fn exact(m: Magnitude) -> Self {
        MagnitudeBracket { lo: m.clone(), hi: m }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn mul(&self, o: &MagnitudeBracket) -> MagnitudeBracket {
        MagnitudeBracket {
            lo: self.lo.mul(&o.lo),
            hi: self.hi.mul(&o.hi),
        }
    }

    pub fn div(&self, o: &MagnitudeBracket) -> MagnitudeBracket {
        MagnitudeBracket {
            lo: self.lo.div(&o.hi),
            hi: self.hi.div(&o.lo),
        }
    }

    pub fn scale(&self, k: &Scalar) -> MagnitudeBracket {
        MagnitudeBracket {
            lo: self.lo.scale(k),
            hi: self.hi.scale(k),
        }
    }

    pub fn recip(&self) -> MagnitudeBracket {
        let one = Magnitude::from_scalar(&Scalar::one());
        MagnitudeBracket {
            lo: one.div(&self.hi),
            hi: one.div(&self.lo),
        }
    }

    /// Collapses to a rational bracket when the exponents are small enough.
    pub fn to_bracket(&self, max_bits: u64) -> Option<Bracket> {
        Some(Bracket {
            lo: self.lo.to_scalar(max_bits)?,
            hi: self.hi.to_scalar(max_bits)?,
        })
    }
}
