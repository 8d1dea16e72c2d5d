//! Configurable-precision real numbers.
//!
//! `PrecReal` couples an arbitrary-precision binary float with the decimal
//! precision it was requested at and an absolute error bound. All real-valued
//! quantities in the crate (gamma values, series sums, probability masses)
//! live in this type. The raw mantissa arithmetic is provided by
//! `astro-float`; everything here is about precision bookkeeping.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};

/// Smallest accepted working precision, in decimal digits.
pub const MIN_DIGITS: u32 = 15;
/// Default working precision, in decimal digits.
pub const DEFAULT_DIGITS: u32 = 50;
/// Upper cap on decimal digits (escalation for badly cancelling series stays
/// well below this at desk scale).
pub const MAX_DIGITS: u32 = 5_000;
/// Default relative-error target for series summation.
pub const DEFAULT_TARGET_REL_ERR: f64 = 1e-30;

const LOG2_10: f64 = 3.321928094887362;
const LOG10_2: f64 = 0.30102999566398114;

/// Extra mantissa bits kept beyond the requested decimal digits.
pub(crate) const GUARD_BITS: usize = 64;

/// Mantissa bits used for a requested decimal precision.
pub(crate) fn bits_for(digits: u32) -> usize {
    (digits as f64 * LOG2_10).ceil() as usize + GUARD_BITS
}

/// Rounding mode used for all value arithmetic.
pub(crate) const RM: RoundingMode = RoundingMode::ToEven;
/// Rounding mode used for error-bound arithmetic (always rounds up).
const RM_UP: RoundingMode = RoundingMode::Up;
/// Bit precision used for error-bound arithmetic.
const ERR_BITS: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Runs `f` with the thread-local astro-float constants cache.
pub(crate) fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

// ---------------------------------------------------------------------------
// Raw BigFloat helpers. All take the mantissa bit precision explicitly.
// ---------------------------------------------------------------------------

pub(crate) fn bf_from_f64(x: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(x, p)
}

pub(crate) fn bf_from_u64(x: u64, p: usize) -> BigFloat {
    BigFloat::from_u64(x, p)
}

pub(crate) fn bf_zero(p: usize) -> BigFloat {
    BigFloat::new(p)
}

pub(crate) fn bf_one(p: usize) -> BigFloat {
    BigFloat::from_u64(1, p)
}

pub(crate) fn add(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.add(b, p, RM)
}

pub(crate) fn sub(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.sub(b, p, RM)
}

pub(crate) fn mul(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.mul(b, p, RM)
}

pub(crate) fn div(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    a.div(b, p, RM)
}

pub(crate) fn neg(a: &BigFloat) -> BigFloat {
    a.neg()
}

pub(crate) fn abs(a: &BigFloat) -> BigFloat {
    let mut r = a.clone();
    r.set_sign(Sign::Pos);
    r
}

pub(crate) fn exp(a: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| a.exp(p, RM, cc))
}

pub(crate) fn ln(a: &BigFloat, p: usize) -> BigFloat {
    with_consts(|cc| a.ln(p, RM, cc))
}

pub(crate) fn sqrt(a: &BigFloat, p: usize) -> BigFloat {
    a.sqrt(p, RM)
}

pub(crate) fn powi(a: &BigFloat, n: usize, p: usize) -> BigFloat {
    a.powi(n, p, RM)
}

pub(crate) fn pi(p: usize) -> BigFloat {
    with_consts(|cc| cc.pi(p, RM))
}

/// 10^k at precision `p`.
pub(crate) fn ten_pow(k: i64, p: usize) -> BigFloat {
    let s = format!("1e{}", k);
    parse_bf(&s, p).expect("power of ten")
}

pub(crate) fn is_negative(a: &BigFloat) -> bool {
    a.is_negative() && !a.is_zero()
}

/// Three-way compare; NaN-free inputs assumed.
pub(crate) fn cmp(a: &BigFloat, b: &BigFloat) -> std::cmp::Ordering {
    match a.cmp(b) {
        Some(v) if v < 0 => std::cmp::Ordering::Less,
        Some(v) if v > 0 => std::cmp::Ordering::Greater,
        _ => std::cmp::Ordering::Equal,
    }
}

pub(crate) fn lt(a: &BigFloat, b: &BigFloat) -> bool {
    cmp(a, b) == std::cmp::Ordering::Less
}

pub(crate) fn le(a: &BigFloat, b: &BigFloat) -> bool {
    cmp(a, b) != std::cmp::Ordering::Greater
}

/// |a| < |b|
pub(crate) fn abs_lt(a: &BigFloat, b: &BigFloat) -> bool {
    matches!(a.abs_cmp(b), Some(v) if v < 0)
}

/// A bound on one unit in the last place of `x` at bit precision `p`:
/// 2^(e-p) where `x` = 0.m * 2^e. Zero for exact zero.
pub(crate) fn ulp(x: &BigFloat, p: usize) -> BigFloat {
    if x.is_zero() || x.is_nan() {
        return bf_zero(ERR_BITS);
    }
    let e = x.exponent().unwrap_or(0) as i64;
    pow2(e - p as i64)
}

/// 2^k as a BigFloat (small precision).
pub(crate) fn pow2(k: i64) -> BigFloat {
    let mut one = bf_one(ERR_BITS);
    // representation of 1 is 0.5 * 2^1, so value 2^k has exponent k + 1
    let e = (k + 1).clamp(i32::MIN as i64 + 1, i32::MAX as i64 - 1) as i32;
    one.set_exponent(e);
    one
}

/// Upper bound on the sum of two error bounds.
pub(crate) fn err_add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, ERR_BITS, RM_UP)
}

/// Upper bound on `a * b` for nonnegative error terms.
pub(crate) fn err_mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, ERR_BITS, RM_UP)
}

pub(crate) fn err_div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, ERR_BITS, RM_UP)
}

/// Rounds a nonnegative bound up to 64-bit working precision.
pub(crate) fn err_shrink(a: &BigFloat) -> BigFloat {
    let mut r = a.clone();
    if r.set_precision(ERR_BITS, RM_UP).is_err() {
        return a.clone();
    }
    r
}

/// Approximate f64 value (top 128 mantissa bits); saturates to ±inf / 0
/// outside the f64 exponent range.
pub(crate) fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let e = x.exponent().unwrap_or(0) as i64;
    let words = x.mantissa_digits().unwrap_or(&[]);
    let top = words.last().copied().unwrap_or(0) as f64;
    let next = if words.len() > 1 {
        words[words.len() - 2] as f64
    } else {
        0.0
    };
    let frac = top / 2f64.powi(64) + next / 2f64.powi(128);
    let mag = if e > 1080 {
        f64::INFINITY
    } else if e < -1080 {
        0.0
    } else if e >= -500 && e <= 500 {
        frac * 2f64.powi(e as i32)
    } else {
        let h = e / 2;
        frac * 2f64.powi(h as i32) * 2f64.powi((e - h) as i32)
    };
    if is_negative(x) {
        -mag
    } else {
        mag
    }
}

/// log10 |x| as f64; `-inf` for zero.
pub(crate) fn log10_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let e = x.exponent().unwrap_or(0) as f64;
    let words = x.mantissa_digits().unwrap_or(&[]);
    let top = words.last().copied().unwrap_or(0) as f64;
    let next = if words.len() > 1 {
        words[words.len() - 2] as f64
    } else {
        0.0
    };
    let frac = top / 2f64.powi(64) + next / 2f64.powi(128);
    e * LOG10_2 + frac.log10()
}

/// Exact conversion of a big integer, then rounding to `p` bits.
pub(crate) fn bigint_to_bf(n: &BigInt, p: usize) -> BigFloat {
    if n.is_zero() {
        return bf_zero(p);
    }
    let (sign, mag) = (n.sign(), n.magnitude());
    let words = mag.to_u64_digits();
    let s = if sign == num_bigint::Sign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    let e = (words.len() * 64) as i64;
    debug_assert!(e <= i32::MAX as i64);
    let mut x = BigFloat::from_words(&words, s, e as i32);
    if x.set_precision(p.max(64), RM).is_err() {
        return BigFloat::nan(None);
    }
    x
}

/// Parses a decimal string at `p` bits.
pub(crate) fn parse_bf(s: &str, p: usize) -> Result<BigFloat> {
    let x = with_consts(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc));
    if x.is_nan() {
        return Err(Error::Domain(format!("cannot parse decimal number {s:?}")));
    }
    Ok(x)
}

/// Formats `x` with exactly `sig` significant decimal digits in scientific
/// notation, e.g. `-1.0457e-12`. Deterministic; round-trips through
/// [`parse_bf`] at the same precision.
pub(crate) fn format_bf(x: &BigFloat, sig: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_inf_pos() {
        return "inf".into();
    }
    if x.is_inf_neg() {
        return "-inf".into();
    }
    let sig = sig.max(1);
    let (s, mut digits, mut e10) =
        with_consts(|cc| x.convert_to_radix(Radix::Dec, RM, cc)).expect("radix conversion");
    // Round the digit string to `sig` digits (half-up on the next digit).
    if digits.len() > sig {
        let round_up = digits[sig] >= 5;
        digits.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.truncate(sig);
                    e10 += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() < sig {
        digits.push(0);
    }
    let mut out = String::with_capacity(sig + 8);
    if s == Sign::Neg {
        out.push('-');
    }
    out.push((b'0' + digits[0]) as char);
    if sig > 1 {
        out.push('.');
        for d in &digits[1..] {
            out.push((b'0' + d) as char);
        }
    }
    // value = 0.d1d2... * 10^e10, so d1.d2... * 10^(e10-1)
    out.push('e');
    let ex = e10 as i64 - 1;
    if ex >= 0 {
        out.push('+');
    }
    out.push_str(&ex.to_string());
    out
}

// ---------------------------------------------------------------------------
// MuParam
// ---------------------------------------------------------------------------

/// The fractional order, restricted to (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuParam {
    mu: f64,
}

impl MuParam {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::Domain(format!(
                "mu must lie in (0, 1], got {mu}"
            )));
        }
        Ok(MuParam { mu })
    }

    pub fn get(&self) -> f64 {
        self.mu
    }

    pub fn is_one(&self) -> bool {
        self.mu == 1.0
    }

    pub(crate) fn to_bf(&self, p: usize) -> BigFloat {
        bf_from_f64(self.mu, p)
    }

    pub(crate) fn key(&self) -> u64 {
        self.mu.to_bits()
    }
}

// ---------------------------------------------------------------------------
// PrecReal
// ---------------------------------------------------------------------------

/// A real number carried at a stated decimal precision together with an
/// absolute error bound on its stored value.
#[derive(Clone)]
pub struct PrecReal {
    value: BigFloat,
    digits: u32,
    err: BigFloat,
}

impl PrecReal {
    /// Validates digits and finiteness. The error bound must be nonnegative
    /// and finite.
    pub fn new(value: BigFloat, digits: u32, err: BigFloat) -> Result<Self> {
        check_digits(digits)?;
        if value.is_nan() || value.is_inf() {
            return Err(Error::Range("non-finite value".into()));
        }
        if err.is_nan() || err.is_inf() || is_negative(&err) {
            return Err(Error::Range("error bound must be finite and >= 0".into()));
        }
        Ok(PrecReal {
            value,
            digits,
            err: err_shrink(&err),
        })
    }

    /// An exact zero.
    pub fn zero(digits: u32) -> Self {
        PrecReal {
            value: bf_zero(bits_for(digits)),
            digits,
            err: bf_zero(ERR_BITS),
        }
    }

    /// An f64 converted exactly (f64 values are representable exactly).
    pub fn from_f64_exact(x: f64, digits: u32) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Range("non-finite input".into()));
        }
        check_digits(digits)?;
        Ok(PrecReal {
            value: bf_from_f64(x, bits_for(digits)),
            digits,
            err: bf_zero(ERR_BITS),
        })
    }

    /// A big integer rounded to the working precision; the error bound is one
    /// ulp when rounding occurred, zero otherwise.
    pub fn from_bigint(n: &BigInt, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        let p = bits_for(digits);
        let v = bigint_to_bf(n, p);
        if v.is_nan() || v.is_inf() {
            return Err(Error::Range("integer exceeds representable range".into()));
        }
        let err = if n.magnitude().bits() as usize <= p {
            bf_zero(ERR_BITS)
        } else {
            ulp(&v, p)
        };
        Ok(PrecReal {
            value: v,
            digits,
            err,
        })
    }

    /// Parses a decimal string at the stated precision. The error bound is
    /// one ulp (the binary rounding of the written decimal).
    pub fn parse(s: &str, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        let p = bits_for(digits);
        let v = parse_bf(s, p)?;
        if v.is_inf() {
            return Err(Error::Range("parsed value is not finite".into()));
        }
        let err = ulp(&v, p);
        Ok(PrecReal {
            value: v,
            digits,
            err,
        })
    }

    pub fn value(&self) -> &BigFloat {
        &self.value
    }

    pub fn precision(&self) -> u32 {
        self.digits
    }

    pub fn err_bound(&self) -> &BigFloat {
        &self.err
    }

    pub fn err_bound_f64(&self) -> f64 {
        to_f64(&self.err)
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    /// Scientific-notation decimal string with `digits` significant digits.
    pub fn to_decimal_string(&self) -> String {
        format_bf(&self.value, self.digits as usize)
    }

    /// Short decimal rendering of the error bound.
    pub fn err_bound_string(&self) -> String {
        format_bf(&self.err, 3)
    }

    fn join_digits(&self, other: &PrecReal) -> u32 {
        self.digits.min(other.digits)
    }

    pub fn add(&self, other: &PrecReal) -> PrecReal {
        let d = self.join_digits(other);
        let p = bits_for(d);
        let v = add(&self.value, &other.value, p);
        let e = err_add(&err_add(&self.err, &other.err), &ulp(&v, p));
        PrecReal {
            value: v,
            digits: d,
            err: e,
        }
    }

    pub fn sub(&self, other: &PrecReal) -> PrecReal {
        let d = self.join_digits(other);
        let p = bits_for(d);
        let v = sub(&self.value, &other.value, p);
        let e = err_add(&err_add(&self.err, &other.err), &ulp(&v, p));
        PrecReal {
            value: v,
            digits: d,
            err: e,
        }
    }

    pub fn mul(&self, other: &PrecReal) -> PrecReal {
        let d = self.join_digits(other);
        let p = bits_for(d);
        let v = mul(&self.value, &other.value, p);
        let mut e = err_add(
            &err_mul(&abs(&self.value), &other.err),
            &err_mul(&abs(&other.value), &self.err),
        );
        e = err_add(&e, &err_mul(&self.err, &other.err));
        e = err_add(&e, &ulp(&v, p));
        PrecReal {
            value: v,
            digits: d,
            err: e,
        }
    }

    pub fn div(&self, other: &PrecReal) -> Result<PrecReal> {
        let d = self.join_digits(other);
        let p = bits_for(d);
        let denom_abs = abs(&other.value);
        // the denominator must be bounded away from zero by its own error
        let two_err = err_add(&other.err, &other.err);
        if other.value.is_zero() || le(&denom_abs, &two_err) {
            return Err(Error::Domain(
                "division by a value indistinguishable from zero".into(),
            ));
        }
        let v = div(&self.value, &other.value, p);
        let num = err_add(&self.err, &err_mul(&abs(&v), &other.err));
        let den = denom_abs.sub(&other.err, ERR_BITS, RoundingMode::Down);
        let mut e = err_div(&num, &den);
        e = err_add(&e, &ulp(&v, p));
        Ok(PrecReal {
            value: v,
            digits: d,
            err: e,
        })
    }

    pub fn neg(&self) -> PrecReal {
        PrecReal {
            value: neg(&self.value),
            digits: self.digits,
            err: self.err.clone(),
        }
    }

    pub fn abs(&self) -> PrecReal {
        PrecReal {
            value: abs(&self.value),
            digits: self.digits,
            err: self.err.clone(),
        }
    }

    /// Widens the error bound; used when a caller folds in external error.
    pub fn with_extra_err(&self, extra: &BigFloat) -> PrecReal {
        PrecReal {
            value: self.value.clone(),
            digits: self.digits,
            err: err_add(&self.err, extra),
        }
    }

    /// True when `self` and `other` differ by at most the sum of their error
    /// bounds plus `abs_tol`.
    pub fn agrees_with(&self, other: &PrecReal, abs_tol: f64) -> bool {
        let p = bits_for(self.join_digits(other));
        let d = abs(&sub(&self.value, &other.value, p));
        let mut tol = err_add(&self.err, &other.err);
        if abs_tol > 0.0 {
            tol = err_add(&tol, &bf_from_f64(abs_tol, ERR_BITS));
        }
        le(&d, &tol)
    }
}

impl std::fmt::Debug for PrecReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PrecReal({} @ {} digits, err <= {:.3e})",
            self.to_decimal_string(),
            self.digits,
            self.err_bound_f64()
        )
    }
}

impl std::fmt::Display for PrecReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_decimal_string())
    }
}

pub(crate) fn check_digits(digits: u32) -> Result<()> {
    if !(MIN_DIGITS..=MAX_DIGITS).contains(&digits) {
        return Err(Error::Domain(format!(
            "precision must lie in [{MIN_DIGITS}, {MAX_DIGITS}] decimal digits, got {digits}"
        )));
    }
    Ok(())
}
