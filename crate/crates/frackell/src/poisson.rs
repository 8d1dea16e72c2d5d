//! The fractional Poisson probability distribution P_μ(n,t).
//!
//! A point mass is (νt^μ)^n/n! times the n-th derivative of the
//! Mittag-Leffler function at -νt^μ, so the pmf rides on the same audited
//! series kernel as everything else. Tables certify their truncated tail
//! through normalization: the masses of a probability law sum to one, so
//! 1 - Σ masses (plus accumulated error bounds) bounds the tail exactly.

use astro_float::BigFloat;

use crate::bell::{bell_poly, BellEvalContext};
use crate::combin::factorial;
use crate::error::{Error, Result};
use crate::mittag_leffler::{ml_series, MAX_DERIVATIVE_ORDER};
use crate::precision::{
    abs, bf_from_f64, bigint_to_bf, bits_for, check_digits, div, err_mul, exp, ln, mul, neg,
    powi, ten_pow, MuParam, PrecReal, DEFAULT_TARGET_REL_ERR,
};
use crate::series::SeriesResult;

/// Largest table size (and derivative order reachable through tables).
pub const MAX_TABLE_N: u32 = 200;

/// Parameters of the law: order μ, rate ν (sec^-μ), time t (sec).
#[derive(Debug, Clone, Copy)]
pub struct PmfParams {
    mu: MuParam,
    nu: f64,
    t: f64,
}

impl PmfParams {
    pub fn new(mu: MuParam, nu: f64, t: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::Domain(format!("nu must be positive, got {nu}")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Domain(format!("t must be nonnegative, got {t}")));
        }
        let x = nu * t.powf(mu.get());
        if !x.is_finite() {
            return Err(Error::Range("nu * t^mu overflows".into()));
        }
        Ok(PmfParams { mu, nu, t })
    }

    pub fn mu(&self) -> MuParam {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x_f64(&self) -> f64 {
        self.nu * self.t.powf(self.mu.get())
    }

    /// ν·t^μ carried with 128 guard bits so its rounding stays far below
    /// every downstream bound.
    pub(crate) fn x_bf(&self, digits: u32) -> BigFloat {
        let p = bits_for(digits) + 128;
        if self.t == 0.0 {
            return crate::precision::bf_zero(p);
        }
        let t = bf_from_f64(self.t, p);
        let t_pow = exp(&mul(&self.mu.to_bf(p), &ln(&t, p), p), p);
        mul(&bf_from_f64(self.nu, p), &t_pow, p)
    }
}

/// A pmf table with a certified bound on the truncated tail mass.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    pub params: PmfParams,
    pub masses: Vec<PrecReal>,
    pub tail_bound: f64,
}

impl DistributionTable {
    pub fn n_max(&self) -> u32 {
        self.masses.len() as u32 - 1
    }

    /// Cumulative sums in f64, for inverse-cdf sampling.
    pub fn cumulative_f64(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.masses
            .iter()
            .map(|m| {
                acc += m.to_f64();
                acc.min(1.0)
            })
            .collect()
    }
}

/// P_μ(n,t) with certified error, via the Mittag-Leffler derivative.
pub fn pmf(params: &PmfParams, n: u32, digits: u32) -> Result<SeriesResult> {
    pmf_with_target(params, n, digits, DEFAULT_TARGET_REL_ERR)
}

pub fn pmf_with_target(
    params: &PmfParams,
    n: u32,
    digits: u32,
    target_rel_err: f64,
) -> Result<SeriesResult> {
    check_digits(digits)?;
    if n > MAX_DERIVATIVE_ORDER {
        return Err(Error::Domain(format!(
            "n = {n} exceeds the derivative-order cap {MAX_DERIVATIVE_ORDER}"
        )));
    }
    if params.t == 0.0 {
        // degenerate law at n = 0; avoids any 0^0 evaluation
        let value = if n == 0 {
            PrecReal::from_f64_exact(1.0, digits)?
        } else {
            PrecReal::zero(digits)
        };
        return Ok(SeriesResult {
            value,
            terms_used: 1,
            max_term_magnitude: bf_from_f64(if n == 0 { 1.0 } else { 0.0 }, 64),
            cancellation_digits: 0.0,
        });
    }
    let x = params.x_bf(digits);
    let z = neg(&x);
    let inner = ml_series(params.mu, &z, n, digits, target_rel_err)?;
    if n == 0 {
        return Ok(inner);
    }
    // prefactor x^n / n!, error dominated by x's guarded rounding
    let p = bits_for(digits) + 128;
    let c = div(&powi(&x, n as usize, p), &bigint_to_bf(&factorial(n as u64), p), p);
    let c_err = err_mul(&abs(&c), &ten_pow(-(digits as i64 + 20), 64));
    let c = PrecReal::new(c, digits, c_err)?;
    Ok(inner.scaled_by(&c))
}

/// Masses for n = 0…n_max plus the normalization tail certificate.
pub fn pmf_table(params: &PmfParams, n_max: u32, digits: u32) -> Result<DistributionTable> {
    #[cfg(feature = "parallel")]
    {
        pmf_table_par(params, n_max, digits)
    }
    #[cfg(not(feature = "parallel"))]
    {
        pmf_table_seq(params, n_max, digits)
    }
}

pub fn pmf_table_seq(params: &PmfParams, n_max: u32, digits: u32) -> Result<DistributionTable> {
    check_table_args(n_max)?;
    let masses = (0..=n_max)
        .map(|n| pmf(params, n, digits).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_table(*params, masses))
}

#[cfg(feature = "parallel")]
pub fn pmf_table_par(params: &PmfParams, n_max: u32, digits: u32) -> Result<DistributionTable> {
    use rayon::prelude::*;
    check_table_args(n_max)?;
    let masses = (0..=n_max)
        .into_par_iter()
        .map(|n| pmf(params, n, digits).map(|r| r.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_table(*params, masses))
}

fn check_table_args(n_max: u32) -> Result<()> {
    if n_max > MAX_TABLE_N {
        return Err(Error::Domain(format!(
            "n_max must not exceed {MAX_TABLE_N}, got {n_max}"
        )));
    }
    Ok(())
}

fn assemble_table(params: PmfParams, masses: Vec<PrecReal>) -> DistributionTable {
    let mut sum = 0.0f64;
    let mut errs = 0.0f64;
    for m in &masses {
        sum += m.to_f64();
        errs += m.err_bound_f64();
    }
    let tail_bound = (1.0 - sum).max(0.0) + errs;
    DistributionTable {
        params,
        masses,
        tail_bound,
    }
}

/// The m-th raw moment Σ_n n^m P_μ(n,t), which equals B_μ(νt^μ, m).
pub fn moment(params: &PmfParams, m: u32, ctx: &BellEvalContext) -> Result<PrecReal> {
    if ctx.mu().get() != params.mu.get() {
        return Err(Error::Contract(format!(
            "context mu = {} does not match params mu = {}",
            ctx.mu().get(),
            params.mu.get()
        )));
    }
    let x = params.x_bf(ctx.digits());
    bell_poly(ctx, &x, m)
}
