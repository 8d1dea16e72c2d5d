//! Real-argument gamma function at configurable precision.
//!
//! The evaluator is a Spouge approximation whose parameter is chosen from the
//! requested precision, so the truncation error is provably below the
//! reported bound at every precision. Series code never calls it in a hot
//! loop directly: values of Γ(μ·j + 1) on the integer lattice j = 0, 1, 2, …
//! are served by [`GammaLattice`], which advances along exact recurrence
//! chains Γ(z+s) = (z+s-1)⋯z·Γ(z) whenever μ·q is exactly an integer for a
//! small q (true for every dyadic μ such as 1, 0.75, 0.5, 0.25).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::BigFloat;
use num_bigint::BigInt;

use crate::combin::factorial;
use crate::error::{Error, Result};
use crate::precision::{
    self, abs, add, bf_from_f64, bf_from_u64, bf_one, bigint_to_bf, bits_for, check_digits, div,
    err_mul, exp, ln, mul, neg, sqrt, sub, ten_pow, to_f64, MuParam, PrecReal, RM,
};

/// Gamma arguments beyond this raise a range error; Γ there is astronomically
/// large and outside any use in this crate.
pub const GAMMA_MAX_ARG: f64 = 1.0e6;

const LOG10_TWO_PI: f64 = 0.7981798683581150;
/// log10 of the largest Spouge series coefficient is about 0.5552 * a.
const SPOUGE_PEAK_FACTOR: f64 = 0.556;

/// Γ(a) for real a > 0 at the requested decimal precision.
///
/// The reported error bound is at most 10^(1-precision)·Γ(a); positive
/// integers are computed through the exact factorial.
pub fn gamma_real(a: f64, digits: u32) -> Result<PrecReal> {
    check_digits(digits)?;
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::Domain(format!(
            "gamma requires a positive argument, got {a}"
        )));
    }
    if a > GAMMA_MAX_ARG {
        return Err(Error::Range(format!(
            "gamma argument {a} exceeds the supported range (max {GAMMA_MAX_ARG})"
        )));
    }
    gamma_bf(&bf_from_f64(a, bits_for(digits)), digits)
}

/// Γ(a) for a positive `BigFloat` argument.
pub(crate) fn gamma_bf(a: &BigFloat, digits: u32) -> Result<PrecReal> {
    check_digits(digits)?;
    if a.is_nan() || a.is_inf() || a.is_zero() || a.is_negative() {
        return Err(Error::Domain("gamma requires a positive argument".into()));
    }
    let af = to_f64(a);
    if af > GAMMA_MAX_ARG {
        return Err(Error::Range(format!(
            "gamma argument {af} exceeds the supported range"
        )));
    }
    if a.is_int() && af <= 40_000.0 {
        // exact factorial path
        return PrecReal::from_bigint(&factorial(af as u64 - 1), digits);
    }
    let v = gamma_spouge(a, digits);
    if v.is_nan() || v.is_inf() {
        return Err(Error::Range("gamma overflow".into()));
    }
    let err = err_mul(&abs(&v), &ten_pow(-(digits as i64), 64));
    PrecReal::new(v, digits, err)
}

/// Spouge parameter: (a + 1/2)·log10(2π) ≥ digits + 3.
fn spouge_param(digits: u32) -> usize {
    ((digits as f64 + 3.0) / LOG10_TWO_PI).ceil() as usize + 1
}

/// The series part cancels down from coefficients of size ~10^(0.556·a), so
/// the bracket is evaluated at this elevated internal precision.
fn spouge_internal_bits(digits: u32, a_param: usize) -> usize {
    bits_for(digits + (SPOUGE_PEAK_FACTOR * a_param as f64).ceil() as u32 + 12)
}

struct SpougeCoeffs {
    a_param: usize,
    p_int: usize,
    /// c[0] = sqrt(2π); c[k] carries its sign (-1)^(k-1).
    c: Vec<BigFloat>,
}

fn spouge_coeffs(digits: u32) -> Arc<SpougeCoeffs> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<SpougeCoeffs>>>> = OnceLock::new();
    let a_param = spouge_param(digits);
    let p_int = spouge_internal_bits(digits, a_param);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&(a_param, p_int)) {
        return hit.clone();
    }
    let built = Arc::new(build_spouge(a_param, p_int));
    cache
        .lock()
        .unwrap()
        .entry((a_param, p_int))
        .or_insert(built)
        .clone()
}

fn build_spouge(a_param: usize, p_int: usize) -> SpougeCoeffs {
    let two_pi = mul(&precision::pi(p_int), &bf_from_u64(2, p_int), p_int);
    let mut c = Vec::with_capacity(a_param);
    c.push(sqrt(&two_pi, p_int));
    // e^(a-k) advances by one division per k; (a-k)^k is exact big-integer.
    let e1 = exp(&bf_one(p_int), p_int);
    let mut e_pow = exp(&bf_from_u64(a_param as u64 - 1, p_int), p_int);
    let mut fact = BigInt::from(1u32); // (k-1)!
    for k in 1..a_param {
        if k > 1 {
            e_pow = div(&e_pow, &e1, p_int);
            fact *= k as u64 - 1;
        }
        let base = (a_param - k) as u64;
        let int_pow = BigInt::from(base).pow(k as u32);
        let mut ck = bigint_to_bf(&int_pow, p_int);
        ck = div(&ck, &sqrt(&bf_from_u64(base, p_int), p_int), p_int);
        ck = mul(&ck, &e_pow, p_int);
        ck = div(&ck, &bigint_to_bf(&fact, p_int), p_int);
        if k % 2 == 0 {
            ck = neg(&ck);
        }
        c.push(ck);
    }
    SpougeCoeffs {
        a_param,
        p_int,
        c,
    }
}

/// Γ(x) via Spouge's formula for x > 0, returned at bits_for(digits).
fn gamma_spouge(x: &BigFloat, digits: u32) -> BigFloat {
    let coeffs = spouge_coeffs(digits);
    let p = coeffs.p_int;
    let one = bf_one(p);
    // Γ(x) = Γ(z+1) with z = x-1; shift x < 1 up by one to keep z >= 0.
    let shifted = precision::lt(x, &one);
    let z = if shifted {
        x.clone()
    } else {
        sub(x, &one, p)
    };

    let mut bracket = coeffs.c[0].clone();
    for (k, ck) in coeffs.c.iter().enumerate().skip(1) {
        let denom = add(&z, &bf_from_u64(k as u64, p), p);
        bracket = add(&bracket, &div(ck, &denom, p), p);
    }
    let za = add(&z, &bf_from_u64(coeffs.a_param as u64, p), p);
    let half = bf_from_f64(0.5, p);
    // (z+a)^(z+1/2) · e^(-(z+a)) = exp((z+1/2)·ln(z+a) - (z+a))
    let u = sub(&mul(&add(&z, &half, p), &ln(&za, p), p), &za, p);
    let mut g = mul(&exp(&u, p), &bracket, p);
    if shifted {
        // computed Γ(x+1); divide by x
        g = div(&g, x, p);
    }
    let mut out = g;
    if out.set_precision(bits_for(digits), RM).is_err() {
        return BigFloat::nan(None);
    }
    out
}

/// Fast f64 log-gamma (Stirling with recursion below 10); used only for
/// magnitude hints, accurate to ~1e-9 relative.
pub(crate) fn lgamma_f64(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
        + shift
}

// ---------------------------------------------------------------------------
// Lattice of Γ(μ·j + 1)
// ---------------------------------------------------------------------------

/// If μ·q is exactly an integer for some q ≤ 20 (exact in the f64 bit
/// pattern, not merely after rounding), returns (q, s = μ·q).
fn dyadic_step(mu: f64) -> Option<(usize, u64)> {
    let bits = mu.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64 - 1075;
    let mant = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    for q in 1..=20u64 {
        let prod = q * mant; // ≤ 20·2^53, no overflow
        if exp >= 0 {
            return Some((q as usize, prod << exp));
        }
        let need = (-exp) as u32;
        if need <= 63 && prod.trailing_zeros() >= need {
            return Some((q as usize, prod >> need));
        }
    }
    None
}

struct LatticeInner {
    values: Vec<BigFloat>,
}

/// Values Γ(μ·j + 1) for j = 0, 1, 2, … shared across threads, grown on
/// demand. Relative error of each entry is below 10^(-digits).
pub(crate) struct GammaLattice {
    mu: MuParam,
    digits: u32,
    step: Option<(usize, u64)>,
    inner: Mutex<LatticeInner>,
}

impl GammaLattice {
    /// Fetches (or creates) the shared lattice for (μ, digits).
    pub(crate) fn shared(mu: MuParam, digits: u32) -> Arc<GammaLattice> {
        static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<GammaLattice>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        cache
            .lock()
            .unwrap()
            .entry((mu.key(), digits))
            .or_insert_with(|| {
                Arc::new(GammaLattice {
                    mu,
                    digits,
                    step: dyadic_step(mu.get()),
                    inner: Mutex::new(LatticeInner { values: Vec::new() }),
                })
            })
            .clone()
    }

    /// Γ(μ·j + 1).
    pub(crate) fn get(&self, j: usize) -> BigFloat {
        let mut inner = self.inner.lock().unwrap();
        if j >= inner.values.len() {
            self.extend(&mut inner, j + 1);
        }
        inner.values[j].clone()
    }

    fn extend(&self, inner: &mut LatticeInner, upto: usize) {
        let p = bits_for(self.digits);
        let mu_bf = self.mu.to_bf(p);
        let one = bf_one(p);
        while inner.values.len() < upto {
            let j = inner.values.len();
            let arg = add(&mul(&mu_bf, &bf_from_u64(j as u64, p), p), &one, p);
            let value = match self.step {
                Some((q, s)) if j >= q => {
                    // Γ(base + s) = (base+s-1)···base · Γ(base), exact step
                    let base_arg = add(
                        &mul(&mu_bf, &bf_from_u64((j - q) as u64, p), p),
                        &one,
                        p,
                    );
                    let mut v = inner.values[j - q].clone();
                    for i in 0..s {
                        v = mul(&v, &add(&base_arg, &bf_from_u64(i, p), p), p);
                    }
                    v
                }
                _ => gamma_bf(&arg, self.digits)
                    .expect("lattice argument is positive")
                    .value()
                    .clone(),
            };
            inner.values.push(value);
        }
    }
}
