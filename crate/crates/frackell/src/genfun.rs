//! Generating functions of the Bell/Stirling families and the
//! coefficient-level verification harness.
//!
//! The four closed forms are thin layers over the Mittag-Leffler evaluator.
//! The verifiers expand (e^s - 1)^l through the exact binomial theorem, read
//! off Taylor coefficients as exact integers over m!·Γ(μl+1), and compare
//! them against the polynomial-side values; only gamma rounding separates
//! the two sides, so a genuine bug cannot hide behind differentiation noise.

use astro_float::BigFloat;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::bell::{bell_poly, BellEvalContext};
use crate::combin::{big_binomial, factorial, int_pow};
use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::mittag_leffler::ml_series;
use crate::precision::{
    bf_from_f64, bf_one, bits_for, check_digits, exp, mul, powi, sub, ten_pow, to_f64, MuParam,
    PrecReal, DEFAULT_TARGET_REL_ERR,
};
use crate::stirling::stirling_value;

/// One order of a coefficient comparison.
#[derive(Debug, Clone)]
pub struct GenFunEntry {
    pub m: u32,
    pub coeff_genfun: PrecReal,
    pub coeff_poly: PrecReal,
    pub abs_diff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Per-order comparison of a generating function against its coefficient
/// family.
#[derive(Debug, Clone)]
pub struct GenFunReport {
    pub label: String,
    pub mu: MuParam,
    pub x_or_t: f64,
    pub order_checked: u32,
    pub entries: Vec<GenFunEntry>,
}

impl GenFunReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &GenFunEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

/// e^s - 1 with guard bits; exact zero at s = 0.
fn exp_minus_one(s: f64, p: usize) -> BigFloat {
    let es = exp(&bf_from_f64(s, p), p);
    sub(&es, &bf_one(p), p)
}

/// F_μ(s,x) = E_μ(x(e^s - 1)).
pub fn gf_bell_poly(mu: MuParam, s: f64, x: f64, digits: u32) -> Result<PrecReal> {
    check_digits(digits)?;
    if !s.is_finite() || !x.is_finite() {
        return Err(Error::Domain("s and x must be finite".into()));
    }
    let p = bits_for(digits) + 64;
    let arg = mul(&bf_from_f64(x, p), &exp_minus_one(s, p), p);
    Ok(ml_series(mu, &arg, 0, digits, DEFAULT_TARGET_REL_ERR)?.value)
}

/// B_μ(s) = E_μ(e^s - 1), the Bell-number generating function.
pub fn gf_bell_numbers(mu: MuParam, s: f64, digits: u32) -> Result<PrecReal> {
    gf_bell_poly(mu, s, 1.0, digits)
}

/// G_μ(s,l) = (e^s - 1)^l / Γ(μl + 1).
pub fn gf_stirling_fixed_l(mu: MuParam, s: f64, l: u32, digits: u32) -> Result<PrecReal> {
    check_digits(digits)?;
    if !s.is_finite() {
        return Err(Error::Domain("s must be finite".into()));
    }
    let p = bits_for(digits) + 64;
    let num = if l == 0 {
        bf_one(p)
    } else {
        powi(&exp_minus_one(s, p), l as usize, p)
    };
    let num = PrecReal::new(
        num.clone(),
        digits,
        crate::precision::err_mul(
            &crate::precision::abs(&num),
            &ten_pow(-(digits as i64 + 5), 64),
        ),
    )?;
    let den = gamma_real(mu.get() * l as f64 + 1.0, digits)?;
    num.div(&den)
}

/// F_μ(s,t) = E_μ(t(e^s - 1)); the same function as [`gf_bell_poly`] with
/// the second variable renamed, kept as its own entry point.
pub fn gf_stirling_bivariate(mu: MuParam, s: f64, t: f64, digits: u32) -> Result<PrecReal> {
    gf_bell_poly(mu, s, t, digits)
}

/// [s^m] (e^s - 1)^l · m!  =  Σ_{n=0}^{l} (-1)^(l-n) binom(l,n) n^m,
/// assembled from binomials right here so the generating-function side does
/// not share the triangle code path.
fn expansion_numerator(m: u32, l: u32) -> BigInt {
    let mut acc = BigInt::zero();
    for n in 0..=l {
        let term = big_binomial(l as u64, n as u64).expect("n <= l") * int_pow(n as u64, m);
        if (l - n) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Checks Σ_m s^m/m! · B_μ(x,m) against E_μ(x(e^s-1)) at the coefficient
/// level: for each m ≤ m_max the m-th Taylor coefficient of the closed form,
/// Σ_l x^l/Γ(μl+1) · (expansion numerator)/m!, must match B_μ(x,m)/m!.
pub fn verify_bell_gf(
    ctx: &BellEvalContext,
    x: f64,
    m_max: u32,
    tolerance: f64,
) -> Result<GenFunReport> {
    if m_max > ctx.triangle().m_max() {
        return Err(Error::Capacity(format!(
            "context triangle holds m <= {}, requested M = {m_max}",
            ctx.triangle().m_max()
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain("x must be finite".into()));
    }
    let mu = ctx.mu();
    let digits = ctx.digits();
    let x_bf = bf_from_f64(x, bits_for(digits));

    let mut entries = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let m_fact = PrecReal::from_bigint(&factorial(m as u64), digits)?;
        let coeff_poly = bell_poly(ctx, &x_bf, m)?.div(&m_fact)?;

        let mut coeff_genfun = PrecReal::zero(digits);
        let mut x_pow = PrecReal::from_f64_exact(1.0, digits)?;
        for l in 0..=m {
            let c = expansion_numerator(m, l);
            if !c.is_zero() {
                let num = PrecReal::from_bigint(&c, digits)?.mul(&x_pow);
                let den = gamma_real(mu.get() * l as f64 + 1.0, digits)?;
                coeff_genfun = coeff_genfun.add(&num.div(&den)?);
            }
            x_pow = x_pow.mul(&PrecReal::from_f64_exact(x, digits)?);
        }
        coeff_genfun = coeff_genfun.div(&m_fact)?;

        entries.push(make_entry(m, coeff_genfun, coeff_poly, tolerance, digits));
    }
    Ok(GenFunReport {
        label: "bell-gf".into(),
        mu,
        x_or_t: x,
        order_checked: m_max,
        entries,
    })
}

/// Checks Σ_{m≥l} S_μ(m,l) s^m/m! against (e^s-1)^l/Γ(μl+1) at the
/// coefficient level, including the exact zeros for m < l.
pub fn verify_stirling_gf(
    mu: MuParam,
    l: u32,
    m_max: u32,
    tolerance: f64,
    digits: u32,
) -> Result<GenFunReport> {
    check_digits(digits)?;
    if !(l <= m_max && m_max <= 60) {
        return Err(Error::Domain(format!(
            "requires l <= M <= 60, got l={l}, M={m_max}"
        )));
    }
    let gamma_l = gamma_real(mu.get() * l as f64 + 1.0, digits)?;
    let mut entries = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let m_fact = PrecReal::from_bigint(&factorial(m as u64), digits)?;
        let coeff_poly = stirling_value(mu, m, l, digits)?.div(&m_fact)?;

        let c = expansion_numerator(m, l);
        let coeff_genfun = if c.is_zero() {
            PrecReal::zero(digits)
        } else {
            PrecReal::from_bigint(&c, digits)?
                .div(&gamma_l)?
                .div(&m_fact)?
        };
        entries.push(make_entry(m, coeff_genfun, coeff_poly, tolerance, digits));
    }
    Ok(GenFunReport {
        label: format!("stirling-gf l={l}"),
        mu,
        x_or_t: l as f64,
        order_checked: m_max,
        entries,
    })
}

fn make_entry(
    m: u32,
    coeff_genfun: PrecReal,
    coeff_poly: PrecReal,
    tolerance: f64,
    digits: u32,
) -> GenFunEntry {
    let p = bits_for(digits);
    let diff = crate::precision::abs(&sub(coeff_genfun.value(), coeff_poly.value(), p));
    let abs_diff = to_f64(&diff);
    GenFunEntry {
        m,
        coeff_genfun,
        coeff_poly,
        abs_diff,
        tolerance,
        passed: abs_diff <= tolerance,
    }
}
