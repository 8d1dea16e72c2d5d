//! Fractional Bell polynomials B_μ(x,m) and Bell numbers B_μ(m).
//!
//! Two routes exist on purpose. The canonical one is the finite expansion
//! over fractional Stirling numbers, B_μ(x,m) = Σ_{l=0}^{m} c(m,l)·x^l/Γ(μl+1),
//! which is exact up to gamma rounding. The second sums the defining double
//! series (the outer sum over n of n^m x^n/n! times the n-th derivative of
//! E_μ at -x) and exists to machine-check that the series rearrangement
//! behind the finite form holds numerically.

use std::sync::Arc;

use astro_float::BigFloat;
use num_bigint::BigInt;

use crate::combin::int_pow;
use crate::error::{Error, Result};
use crate::gamma::GammaLattice;
use crate::mittag_leffler::{ml_series_cached, MAX_DERIVATIVE_ORDER};
use crate::precision::{
    abs, add, bf_from_f64, bf_one, bf_zero, bigint_to_bf, bits_for, check_digits, div, err_add,
    err_mul, err_shrink, is_negative, le, lt, mul, ten_pow, to_f64, ulp, MuParam, PrecReal, RM,
};
use crate::series::SeriesResult;
use crate::stirling::{build_triangle, StirlingTriangle};

/// Desk-scale caps for the series route (the finite route has no x cap).
pub const SERIES_MAX_M: u32 = 30;
pub const SERIES_MAX_X: f64 = 30.0;

/// Precomputed state for evaluating Bell polynomials at one order μ.
#[derive(Clone)]
pub struct BellEvalContext {
    mu: MuParam,
    triangle: Arc<StirlingTriangle>,
    digits: u32,
}

impl BellEvalContext {
    /// Builds the numerator triangle up to `m_max`.
    pub fn new(mu: MuParam, m_max: u32, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        Ok(BellEvalContext {
            mu,
            triangle: Arc::new(build_triangle(m_max)?),
            digits,
        })
    }

    /// Shares an existing triangle.
    pub fn with_triangle(mu: MuParam, triangle: Arc<StirlingTriangle>, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        Ok(BellEvalContext {
            mu,
            triangle,
            digits,
        })
    }

    pub fn mu(&self) -> MuParam {
        self.mu
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn triangle(&self) -> &StirlingTriangle {
        &self.triangle
    }

    fn check_m(&self, m: u32) -> Result<()> {
        if m > self.triangle.m_max() {
            return Err(Error::Capacity(format!(
                "context triangle holds m <= {}, requested m = {m}; rebuild with a larger m_max",
                self.triangle.m_max()
            )));
        }
        Ok(())
    }
}

/// B_μ(x,m) by the finite Stirling expansion; defined for all real x.
pub fn bell_poly(ctx: &BellEvalContext, x: &BigFloat, m: u32) -> Result<PrecReal> {
    ctx.check_m(m)?;
    if x.is_nan() || x.is_inf() {
        return Err(Error::Domain("x must be finite".into()));
    }
    finite_sum(ctx, Some(x), m)
}

/// Convenience wrapper for f64 arguments.
pub fn bell_poly_f64(ctx: &BellEvalContext, x: f64, m: u32) -> Result<PrecReal> {
    if !x.is_finite() {
        return Err(Error::Domain("x must be finite".into()));
    }
    bell_poly(ctx, &bf_from_f64(x, bits_for(ctx.digits)), m)
}

/// B_μ(m) = B_μ(1,m) = Σ_{l=0}^{m} c(m,l)/Γ(μl+1).
pub fn bell_number(ctx: &BellEvalContext, m: u32) -> Result<PrecReal> {
    ctx.check_m(m)?;
    finite_sum(ctx, None, m)
}

/// Shared finite-expansion evaluator; `x = None` means x = 1.
fn finite_sum(ctx: &BellEvalContext, x: Option<&BigFloat>, m: u32) -> Result<PrecReal> {
    let digits = ctx.digits;
    // alternating only for x < 0; estimate the digits cancelled there
    let canc = match x {
        Some(x) if is_negative(x) => negative_x_cancellation(ctx, x, m),
        _ => 0.0,
    };
    let work = digits + 10 + canc.ceil() as u32;
    let p = bits_for(work);
    let lattice = GammaLattice::shared(ctx.mu, work);
    let gamma_rel = ten_pow(-(work as i64), 64);

    let mut sum = bf_zero(p);
    let mut err = bf_zero(64);
    let mut x_pow = bf_one(p);
    for l in 0..=m {
        let c = &ctx.triangle.row(m).expect("m checked")[l as usize];
        if !num_traits::Zero::is_zero(c) {
            let num = mul(&bigint_to_bf(c, p), &x_pow, p);
            let term = div(&num, &lattice.get(l as usize), p);
            sum = add(&sum, &term, p);
            // gamma relative error dominates the term error
            err = err_add(&err, &err_mul(&abs(&term), &gamma_rel));
            err = err_add(&err, &ulp(&term, p));
        }
        if let Some(x) = x {
            x_pow = mul(&x_pow, x, p);
        }
    }
    let mut value = sum;
    let ok = value.set_precision(bits_for(digits), RM).is_ok();
    debug_assert!(ok);
    err = err_add(&err, &ulp(&value, bits_for(digits)));
    PrecReal::new(value, digits, err)
}

/// f64 scan of log10 |c(m,l) x^l / Γ(μl+1)| to size the cancellation for
/// negative x.
fn negative_x_cancellation(ctx: &BellEvalContext, x: &BigFloat, m: u32) -> f64 {
    let lx = crate::precision::log10_abs(x);
    let mu = ctx.mu.get();
    let mut peak = 0.0f64;
    for l in 0..=m {
        let c_bits = ctx
            .triangle
            .numerator(m, l)
            .map(|c| c.bits() as f64)
            .unwrap_or(0.0);
        let lg = c_bits * std::f64::consts::LN_2 / std::f64::consts::LN_10
            + l as f64 * lx
            - crate::gamma::lgamma_f64(mu * l as f64 + 1.0) / std::f64::consts::LN_10;
        peak = peak.max(lg);
    }
    // the sum itself can be anywhere down to ~0; assume full loss above 1
    peak.max(0.0)
}

/// B_μ(x,m) by the defining double series (x ≥ 0, desk-scale caps). The
/// inner sum over k is the n-th Mittag-Leffler derivative at -x; the outer
/// sum over n has nonnegative terms, so only its tail needs certification.
pub fn bell_poly_series(
    mu: MuParam,
    x: &BigFloat,
    m: u32,
    digits: u32,
    target_rel_err: f64,
) -> Result<SeriesResult> {
    check_digits(digits)?;
    if x.is_nan() || x.is_inf() || is_negative(x) {
        return Err(Error::Domain(
            "the series route is restricted to x >= 0".into(),
        ));
    }
    if m > SERIES_MAX_M {
        return Err(Error::Domain(format!(
            "series route caps m at {SERIES_MAX_M}, got {m}"
        )));
    }
    let xf = to_f64(x);
    if xf > SERIES_MAX_X {
        return Err(Error::Domain(format!(
            "series route caps x at {SERIES_MAX_X}, got {xf}"
        )));
    }
    if !(target_rel_err > 1e-200 && target_rel_err < 1e-6) {
        return Err(Error::Domain(format!(
            "target_rel_err must lie in (1e-200, 1e-6), got {target_rel_err}"
        )));
    }

    let work = digits + 10;
    let p = bits_for(work);
    let inner_target = (target_rel_err / 10.0).max(2e-200);
    let minus_x = crate::precision::neg(x);
    let rel = bf_from_f64(target_rel_err, 64);
    let floor = ten_pow(-(digits as i64), 64);

    let mut sum = bf_zero(p);
    let mut inner_err = bf_zero(64);
    let mut max_term = bf_zero(64);
    let mut x_pow = bf_one(p);
    let mut fact = BigInt::from(1u32);
    let mut prev = bf_zero(64);
    let mut decay_run = 0usize;
    let mut ratios = [1.0f64; 3];
    let mut terms_used = 0usize;

    for n in 0..=MAX_DERIVATIVE_ORDER as usize {
        if n > 0 {
            fact *= n as u64;
        }
        // coefficient n^m x^n / n!
        let coef = div(
            &mul(&bigint_to_bf(&int_pow(n as u64, m), p), &x_pow, p),
            &bigint_to_bf(&fact, p),
            p,
        );
        x_pow = mul(&x_pow, x, p);

        let term;
        if coef.is_zero() {
            term = bf_zero(p);
        } else {
            let d = ml_series_cached(mu, &minus_x, n as u32, work, inner_target)?;
            term = mul(&coef, d.value.value(), p);
            inner_err = err_add(&inner_err, &err_mul(&abs(&coef), d.value.err_bound()));
        }
        sum = add(&sum, &term, p);
        terms_used = n + 1;
        let t_abs = err_shrink(&abs(&term));
        if lt(&max_term, &t_abs) {
            max_term = t_abs.clone();
        }

        let decayed = if prev.is_zero() {
            t_abs.is_zero()
        } else {
            lt(&t_abs, &prev)
        };
        let ratio = if prev.is_zero() {
            0.0
        } else {
            to_f64(&t_abs.div(&prev, 64, RM))
        };
        if n > 0 {
            if decayed {
                ratios[decay_run % 3] = ratio;
                decay_run += 1;
            } else {
                decay_run = 0;
            }
            if decay_run >= 3 {
                let r = ratios.iter().cloned().fold(0.0f64, f64::max);
                if r < 0.999 {
                    let tail = err_mul(&t_abs, &bf_from_f64(r / (1.0 - r), 64));
                    let threshold = {
                        let by_rel = err_mul(&abs(&sum), &rel);
                        if lt(&by_rel, &floor) {
                            floor.clone()
                        } else {
                            by_rel
                        }
                    };
                    if le(&tail, &err_mul(&threshold, &bf_from_f64(0.5, 64))) {
                        return finish_series(sum, digits, work, tail, inner_err, max_term, terms_used);
                    }
                }
            }
        }
        prev = t_abs;
    }
    Err(Error::NonConvergence {
        terms: terms_used,
        last_ratio: f64::NAN,
    })
}

fn finish_series(
    sum: BigFloat,
    digits: u32,
    work: u32,
    tail: BigFloat,
    inner_err: BigFloat,
    max_term: BigFloat,
    terms_used: usize,
) -> Result<SeriesResult> {
    let mut value = sum;
    let ok = value.set_precision(bits_for(digits), RM).is_ok();
    debug_assert!(ok);
    let rounding = err_mul(
        &err_mul(&max_term, &bf_from_f64(terms_used as f64, 64)),
        &ten_pow(1 - work as i64, 64),
    );
    let mut err = err_add(&tail, &inner_err);
    err = err_add(&err, &rounding);
    err = err_add(&err, &ulp(&value, bits_for(digits)));
    Ok(SeriesResult {
        value: PrecReal::new(value, digits, err)?,
        terms_used,
        max_term_magnitude: max_term,
        cancellation_digits: 0.0,
    })
}

/// Convenience wrapper for f64 arguments.
pub fn bell_poly_series_f64(
    mu: MuParam,
    x: f64,
    m: u32,
    digits: u32,
    target_rel_err: f64,
) -> Result<SeriesResult> {
    if !x.is_finite() {
        return Err(Error::Domain("x must be finite".into()));
    }
    bell_poly_series(mu, &bf_from_f64(x, bits_for(digits)), m, digits, target_rel_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::parse_bf;

    fn ctx(mu: f64, m_max: u32) -> BellEvalContext {
        BellEvalContext::new(MuParam::new(mu).unwrap(), m_max, 50).unwrap()
    }

    #[test]
    fn normalization_order_zero() {
        let c = ctx(0.5, 4);
        assert_eq!(bell_poly_f64(&c, 3.7, 0).unwrap().to_f64(), 1.0);
        assert_eq!(bell_number(&c, 0).unwrap().to_f64(), 1.0);
    }

    #[test]
    fn vanishes_at_x_zero_for_positive_order() {
        let c = ctx(0.25, 5);
        for m in 1..=5 {
            assert_eq!(bell_poly_f64(&c, 0.0, m).unwrap().to_f64(), 0.0, "m={m}");
        }
    }

    #[test]
    fn classic_bell_values_at_mu_one() {
        let c = ctx(1.0, 6);
        assert_eq!(bell_poly_f64(&c, 1.0, 3).unwrap().to_f64(), 5.0);
        assert_eq!(bell_number(&c, 4).unwrap().to_f64(), 15.0);
        assert_eq!(bell_number(&c, 6).unwrap().to_f64(), 203.0);
    }

    #[test]
    fn half_order_reference_values() {
        let c = ctx(0.5, 2);
        let expect = parse_bf(
            "3.128379167095512573896158903121545171688101258657998",
            bits_for(60),
        )
        .unwrap();
        let v = bell_poly_f64(&c, 1.0, 2).unwrap();
        let diff = abs(&crate::precision::sub(v.value(), &expect, bits_for(60)));
        assert!(le(&diff, &err_add(v.err_bound(), &ten_pow(-48, 64))));

        let b1 = bell_number(&c, 1).unwrap();
        assert!((b1.to_f64() - 1.1283791670955126).abs() < 1e-15);
    }

    #[test]
    fn first_moment_is_single_term() {
        // B_μ(x,1) = x/Γ(μ+1)
        for mu in [0.25, 0.5, 0.75, 1.0] {
            let c = ctx(mu, 1);
            let v = bell_poly_f64(&c, 2.5, 1).unwrap();
            let g = crate::gamma::gamma_real(mu + 1.0, 50).unwrap();
            let expect = PrecReal::from_f64_exact(2.5, 50).unwrap().div(&g).unwrap();
            assert!(v.agrees_with(&expect, 0.0), "mu={mu}");
        }
    }

    #[test]
    fn series_route_matches_finite_route() {
        let c = ctx(0.5, 2);
        let finite = bell_poly_f64(&c, 1.0, 2).unwrap();
        let series = bell_poly_series_f64(MuParam::new(0.5).unwrap(), 1.0, 2, 50, 1e-30).unwrap();
        assert!(
            series.value.agrees_with(&finite, 0.0),
            "finite {} vs series {}",
            finite,
            series.value
        );
    }

    #[test]
    fn series_route_normalization_and_mean() {
        let one = bell_poly_series_f64(MuParam::new(1.0).unwrap(), 1.0, 0, 50, 1e-30).unwrap();
        assert!((one.value.to_f64() - 1.0).abs() < 1e-25);
        let mean = bell_poly_series_f64(MuParam::new(1.0).unwrap(), 2.0, 1, 50, 1e-30).unwrap();
        assert!((mean.value.to_f64() - 2.0).abs() < 1e-25);
    }

    #[test]
    fn series_route_domain_checks() {
        let mu = MuParam::new(0.5).unwrap();
        assert!(bell_poly_series_f64(mu, -1.0, 2, 50, 1e-30).is_err());
        assert!(bell_poly_series_f64(mu, 31.0, 2, 50, 1e-30).is_err());
        assert!(bell_poly_series_f64(mu, 1.0, 31, 50, 1e-30).is_err());
    }

    #[test]
    fn capacity_error_when_triangle_too_small() {
        let c = ctx(0.5, 3);
        match bell_poly_f64(&c, 1.0, 4) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn monotone_in_x_for_nonnegative_x() {
        let c = ctx(0.75, 4);
        for m in 0..=4u32 {
            let mut last = -1.0f64;
            for x in [0.0, 0.5, 1.0, 2.0, 5.0] {
                let v = bell_poly_f64(&c, x, m).unwrap().to_f64();
                assert!(v >= last, "m={m} x={x}");
                last = v;
            }
        }
    }

    #[test]
    fn negative_x_is_accepted_by_finite_route() {
        let c = ctx(0.5, 6);
        let v = bell_poly_f64(&c, -2.0, 5).unwrap();
        assert!(v.to_f64().is_finite());
        // odd polynomial part dominates here; just pin the sign regime
        assert!(v.to_f64() < 0.5);
    }
}
