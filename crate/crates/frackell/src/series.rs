//! Adaptive series summation with cancellation-aware precision escalation.
//!
//! The engine sums terms at a working precision, watches the ratio of
//! consecutive terms for a geometric tail bound, and declares convergence
//! only after three consecutively decaying terms. After a pass it measures
//! how many digits were lost to cancellation (largest term vs. result) and
//! re-runs at a higher working precision when the first pass could not have
//! produced the requested digits.

use astro_float::BigFloat;

use crate::error::{Error, Result};
use crate::precision::{
    abs, abs_lt, add, bf_from_f64, bf_zero, bits_for, check_digits, err_add, err_mul, err_shrink,
    le, log10_abs, lt, ten_pow, to_f64, ulp, PrecReal, RM,
};

/// Hard cap on terms consumed in a single pass.
pub const DEFAULT_MAX_TERMS: usize = 100_000;

const MAX_PASSES: usize = 10;
const DECAY_RUN: usize = 3;

/// A sequential generator of series terms at a stated working precision.
///
/// `begin` is called before each pass; `next_term` must then yield terms
/// t_0, t_1, … in order, each carrying relative error no worse than a few
/// units in the last place at the requested precision.
pub trait TermSource {
    fn begin(&mut self, digits: u32);
    fn next_term(&mut self) -> BigFloat;
}

/// Closure adapter: `f(k, digits)` yields the k-th term.
pub struct FnSource<F: FnMut(usize, u32) -> BigFloat> {
    f: F,
    digits: u32,
    k: usize,
}

impl<F: FnMut(usize, u32) -> BigFloat> FnSource<F> {
    pub fn new(f: F) -> Self {
        FnSource { f, digits: 0, k: 0 }
    }
}

impl<F: FnMut(usize, u32) -> BigFloat> TermSource for FnSource<F> {
    fn begin(&mut self, digits: u32) {
        self.digits = digits;
        self.k = 0;
    }

    fn next_term(&mut self) -> BigFloat {
        let t = (self.f)(self.k, self.digits);
        self.k += 1;
        t
    }
}

/// Options for [`sum_adaptive`].
#[derive(Debug, Clone)]
pub struct SumOptions {
    /// Requested relative accuracy, in (1e-200, 1e-6).
    pub target_rel_err: f64,
    /// Decimal precision of the returned value.
    pub digits: u32,
    /// Term cap per pass.
    pub max_terms: usize,
    /// Expected decimal digits of cancellation, if the caller can estimate
    /// it; saves re-runs but never changes the result.
    pub cancellation_hint: f64,
}

impl SumOptions {
    pub fn new(digits: u32, target_rel_err: f64) -> Self {
        SumOptions {
            target_rel_err,
            digits,
            max_terms: DEFAULT_MAX_TERMS,
            cancellation_hint: 0.0,
        }
    }
}

/// Value, certificate, and diagnostics of one series evaluation.
#[derive(Debug, Clone)]
pub struct SeriesResult {
    pub value: PrecReal,
    /// Terms consumed by the accepted pass.
    pub terms_used: usize,
    /// Magnitude of the largest term encountered.
    pub max_term_magnitude: BigFloat,
    /// log10(max term / |value|); 0 when the value is zero within its bound.
    pub cancellation_digits: f64,
}

impl SeriesResult {
    pub fn max_term_magnitude_f64(&self) -> f64 {
        to_f64(&self.max_term_magnitude)
    }

    /// The result of multiplying the summed series by a nonnegative exact
    /// prefactor (diagnostics scale along).
    pub(crate) fn scaled_by(&self, c: &PrecReal) -> SeriesResult {
        SeriesResult {
            value: self.value.mul(c),
            terms_used: self.terms_used,
            max_term_magnitude: err_shrink(&err_mul(
                &self.max_term_magnitude,
                &abs(c.value()),
            )),
            cancellation_digits: self.cancellation_digits,
        }
    }
}

struct Pass {
    sum: BigFloat,
    max_abs: BigFloat,
    terms: usize,
    tail: BigFloat,
}

/// Sums `src` until the geometric tail estimate drops below the target,
/// escalating the working precision whenever cancellation ate into the
/// requested digits.
pub fn sum_adaptive(src: &mut dyn TermSource, opts: &SumOptions) -> Result<SeriesResult> {
    check_digits(opts.digits)?;
    if !(opts.target_rel_err > 1e-200 && opts.target_rel_err < 1e-6) {
        return Err(Error::Domain(format!(
            "target_rel_err must lie in (1e-200, 1e-6), got {}",
            opts.target_rel_err
        )));
    }
    if opts.max_terms == 0 {
        return Err(Error::Domain("max_terms must be positive".into()));
    }

    let digits = opts.digits;
    let hint = opts.cancellation_hint.max(0.0).min(20_000.0).ceil() as u32;
    let mut work = digits + 10 + hint;

    let mut last: Option<(Pass, u32)> = None;
    for _ in 0..MAX_PASSES {
        let pass = run_pass(src, work, opts)?;

        // digits lost to cancellation, measured against the absolute floor
        let floor_log = -(digits as f64);
        let sum_log = log10_abs(&pass.sum).max(floor_log);
        let canc = (log10_abs(&pass.max_abs) - sum_log).max(0.0);
        let canc_ceil = if canc.is_finite() { canc.ceil() as u32 } else { 0 };

        let needed = digits + canc_ceil + 10;
        if work >= needed {
            return Ok(finish(pass, digits, work, canc, opts));
        }
        // re-run; when the pass was pure rounding noise the measured
        // cancellation underestimates, so also grow geometrically
        work = needed.max(work.saturating_mul(2));
        last = Some((pass, work));
    }
    // escalation budget exhausted; report the last pass honestly
    let (pass, _) = last.expect("at least one pass ran");
    Err(Error::NonConvergence {
        terms: pass.terms,
        last_ratio: f64::NAN,
    })
}

fn run_pass(src: &mut dyn TermSource, work: u32, opts: &SumOptions) -> Result<Pass> {
    let p = bits_for(work);
    let floor = ten_pow(-(opts.digits as i64), 64);
    let rel = bf_from_f64(opts.target_rel_err, 64);

    src.begin(work);
    let mut sum = bf_zero(p);
    let mut max_abs = bf_zero(64);
    let mut prev_abs: Option<BigFloat> = None;
    let mut ratios = [f64::INFINITY; DECAY_RUN];
    let mut decay_run = 0usize;
    let mut last_ratio = f64::INFINITY;

    for k in 0..opts.max_terms {
        let t = src.next_term();
        if t.is_nan() || t.is_inf() {
            return Err(Error::Range(format!("term {k} is not finite")));
        }
        sum = add(&sum, &t, p);
        let t_abs = abs(&t);
        if lt(&max_abs, &t_abs) {
            max_abs = err_shrink(&t_abs);
        }

        if let Some(pa) = &prev_abs {
            let decayed = if pa.is_zero() {
                t_abs.is_zero()
            } else {
                abs_lt(&t, pa)
            };
            let ratio = if pa.is_zero() {
                0.0
            } else {
                to_f64(&t_abs.div(pa, 64, RM))
            };
            last_ratio = ratio;
            if decayed {
                ratios[decay_run % DECAY_RUN] = ratio;
                decay_run += 1;
            } else {
                decay_run = 0;
            }

            if decay_run >= DECAY_RUN {
                let r = ratios.iter().cloned().fold(0.0f64, f64::max);
                if r < 0.999 {
                    // tail <= |t_{k+1}| / (1 - r) <= |t_k| * r / (1 - r)
                    let tail = err_mul(&t_abs, &bf_from_f64(r / (1.0 - r), 64));
                    let threshold = {
                        let by_rel = err_mul(&abs(&sum), &rel);
                        if lt(&by_rel, &floor) {
                            floor.clone()
                        } else {
                            by_rel
                        }
                    };
                    let half = err_mul(&threshold, &bf_from_f64(0.5, 64));
                    if le(&tail, &half) {
                        return Ok(Pass {
                            sum,
                            max_abs,
                            terms: k + 1,
                            tail,
                        });
                    }
                }
            }
        }
        prev_abs = Some(t_abs);
    }
    Err(Error::NonConvergence {
        terms: opts.max_terms,
        last_ratio,
    })
}

fn finish(pass: Pass, digits: u32, work: u32, canc: f64, opts: &SumOptions) -> SeriesResult {
    let p_out = bits_for(digits);
    let mut value = pass.sum.clone();
    let rounded_ok = value.set_precision(p_out, RM).is_ok();
    debug_assert!(rounded_ok);

    // truncation + accumulated rounding at the working precision + final round
    let rounding = err_mul(
        &err_mul(&pass.max_abs, &bf_from_f64(pass.terms as f64, 64)),
        &ten_pow(1 - work as i64, 64),
    );
    let mut err = err_add(&pass.tail, &rounding);
    err = err_add(&err, &ulp(&value, p_out));

    // zero within the bound reports no cancellation
    let is_zero_within = value.is_zero() || le(&abs(&value), &err);
    let canc_out = if is_zero_within { 0.0 } else { canc.max(0.0) };

    let value = PrecReal::new(value, digits, err).expect("finite series value");
    debug_assert!(pass.terms >= 1);
    let _ = opts;
    SeriesResult {
        value,
        terms_used: pass.terms,
        max_term_magnitude: pass.max_abs,
        cancellation_digits: canc_out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::{bf_from_u64, bf_one, div, exp, mul, parse_bf, sub};

    /// Σ 1/m! = e with essentially no cancellation.
    #[test]
    fn exponential_series_converges_to_e() {
        let mut src = FnSource::new(|k, digits| {
            let p = bits_for(digits);
            let mut t = bf_one(p);
            for i in 1..=k as u64 {
                t = div(&t, &bf_from_u64(i, p), p);
            }
            t
        });
        let r = sum_adaptive(&mut src, &SumOptions::new(50, 1e-30)).unwrap();
        let e = exp(&bf_one(bits_for(60)), bits_for(60));
        let diff = abs(&sub(r.value.value(), &e, bits_for(60)));
        assert!(le(&diff, r.value.err_bound()), "e mismatch");
        assert!(r.cancellation_digits < 1.0);
        assert!(r.terms_used > 10);
    }

    /// Σ (-10)^m/m! = e^(-10): heavy cancellation, about 8 digits lost.
    #[test]
    fn alternating_exponential_reports_cancellation() {
        let mut src = FnSource::new(|k, digits| {
            let p = bits_for(digits);
            let mut t = bf_one(p);
            for i in 1..=k as u64 {
                t = mul(&t, &bf_from_f64(-10.0, p), p);
                t = div(&t, &bf_from_u64(i, p), p);
            }
            t
        });
        let r = sum_adaptive(&mut src, &SumOptions::new(50, 1e-30)).unwrap();
        let expect = parse_bf(
            "4.539992976248485153559151556055061023791808886656497e-5",
            bits_for(60),
        )
        .unwrap();
        let diff = abs(&sub(r.value.value(), &expect, bits_for(60)));
        assert!(
            le(&diff, r.value.err_bound()),
            "exp(-10) diff {:e}",
            to_f64(&diff)
        );
        assert!(
            (6.0..10.0).contains(&r.cancellation_digits),
            "cancellation {}",
            r.cancellation_digits
        );
    }

    /// {1, 0, 0, …} sums to exactly 1.
    #[test]
    fn single_term_series() {
        let mut src = FnSource::new(|k, digits| {
            let p = bits_for(digits);
            if k == 0 {
                bf_one(p)
            } else {
                bf_zero(p)
            }
        });
        let r = sum_adaptive(&mut src, &SumOptions::new(30, 1e-20)).unwrap();
        assert_eq!(r.value.to_f64(), 1.0);
        assert!(r.terms_used >= 1);
        assert_eq!(r.cancellation_digits, 0.0);
    }

    #[test]
    fn non_decaying_series_errors_out() {
        let mut src = FnSource::new(|_, digits| bf_one(bits_for(digits)));
        let mut opts = SumOptions::new(20, 1e-10);
        opts.max_terms = 500;
        match sum_adaptive(&mut src, &opts) {
            Err(Error::NonConvergence { terms, last_ratio }) => {
                assert_eq!(terms, 500);
                assert!((last_ratio - 1.0).abs() < 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut src = FnSource::new(|_, digits| bf_zero(bits_for(digits)));
        assert!(sum_adaptive(&mut src, &SumOptions::new(30, 1e-5)).is_err());
        assert!(sum_adaptive(&mut src, &SumOptions::new(30, 1e-201)).is_err());
        assert!(sum_adaptive(&mut src, &SumOptions::new(5, 1e-20)).is_err());
    }

    /// Geometric series with known closed form: reported bound brackets the
    /// true error (the acceptance-grade property test lives in tests/).
    #[test]
    fn geometric_bound_brackets_truth() {
        for q in [0.1f64, 0.35, 0.6, 0.85] {
            let mut src = FnSource::new(move |k, digits| {
                let p = bits_for(digits);
                powi_signed(-q, k, p)
            });
            let r = sum_adaptive(&mut src, &SumOptions::new(40, 1e-25)).unwrap();
            // closed form 1/(1+q) with q widened exactly from its f64 bits
            let p = bits_for(60);
            let denom = add(&bf_one(p), &bf_from_f64(q, p), p);
            let truth = div(&bf_one(p), &denom, p);
            let diff = abs(&sub(r.value.value(), &truth, p));
            assert!(le(&diff, r.value.err_bound()), "q={q}");
        }
    }

    fn powi_signed(x: f64, k: usize, p: usize) -> BigFloat {
        let mut t = bf_one(p);
        for _ in 0..k {
            t = mul(&t, &bf_from_f64(x, p), p);
        }
        t
    }
}
