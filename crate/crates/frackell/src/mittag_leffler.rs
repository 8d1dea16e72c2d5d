//! The one-parameter Mittag-Leffler function E_μ(z) and its integer-order
//! derivatives, for real z.
//!
//! Everything is evaluated through the globally convergent power series
//! Σ z^m / Γ(μm + 1); the n-th derivative series carries the exact integer
//! coefficients (m+n)!/m!, kept as big integers until the final rounding.
//! Negative arguments alternate with large intermediate terms, which the
//! summation engine absorbs by escalating its working precision.

use astro_float::BigFloat;
use num_bigint::BigInt;

use crate::combin::factorial;
use crate::error::{Error, Result};
use crate::gamma::{lgamma_f64, GammaLattice};
use crate::precision::{
    bf_one, bigint_to_bf, bits_for, check_digits, div, is_negative, log10_abs, mul, MuParam,
    DEFAULT_TARGET_REL_ERR, RM,
};
use crate::series::{sum_adaptive, SeriesResult, SumOptions, TermSource};

/// Largest supported derivative order.
pub const MAX_DERIVATIVE_ORDER: u32 = 200;

/// One evaluation request: order, argument, derivative order, accuracy.
#[derive(Debug, Clone)]
pub struct MLRequest {
    mu: MuParam,
    z: BigFloat,
    derivative_order: u32,
    target_rel_err: f64,
    digits: u32,
}

impl MLRequest {
    pub fn new(mu: MuParam, z: f64, digits: u32) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::Domain("z must be finite".into()));
        }
        Self::from_bigfloat(mu, crate::precision::bf_from_f64(z, bits_for(digits)), digits)
    }

    /// Builds a request from an already high-precision argument (used when z
    /// is a computed quantity such as -ν·t^μ).
    pub fn from_bigfloat(mu: MuParam, z: BigFloat, digits: u32) -> Result<Self> {
        check_digits(digits)?;
        if z.is_nan() || z.is_inf() {
            return Err(Error::Domain("z must be finite".into()));
        }
        Ok(MLRequest {
            mu,
            z,
            derivative_order: 0,
            target_rel_err: DEFAULT_TARGET_REL_ERR,
            digits,
        })
    }

    pub fn with_derivative(mut self, n: u32) -> Result<Self> {
        if n > MAX_DERIVATIVE_ORDER {
            return Err(Error::Domain(format!(
                "derivative order {n} exceeds the cap {MAX_DERIVATIVE_ORDER}"
            )));
        }
        self.derivative_order = n;
        Ok(self)
    }

    pub fn with_target_rel_err(mut self, e: f64) -> Self {
        self.target_rel_err = e;
        self
    }

    pub fn mu(&self) -> MuParam {
        self.mu
    }

    pub fn z(&self) -> &BigFloat {
        &self.z
    }

    pub fn derivative_order(&self) -> u32 {
        self.derivative_order
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }
}

/// E_μ(z) = Σ_{m≥0} z^m / Γ(μm + 1).
pub fn ml_eval(req: &MLRequest) -> Result<SeriesResult> {
    if req.derivative_order != 0 {
        return Err(Error::Contract(
            "ml_eval requires derivative_order = 0; use ml_derivative".into(),
        ));
    }
    ml_series(req.mu, &req.z, 0, req.digits, req.target_rel_err)
}

/// The n-th derivative of E_μ at z (n ≥ 1), by termwise differentiation:
/// Σ_{k≥0} (k+n)!/k! · z^k / Γ(μ(k+n) + 1).
pub fn ml_derivative(req: &MLRequest) -> Result<SeriesResult> {
    if req.derivative_order == 0 {
        return Err(Error::Contract(
            "ml_derivative requires derivative_order >= 1; use ml_eval".into(),
        ));
    }
    ml_series(
        req.mu,
        &req.z,
        req.derivative_order,
        req.digits,
        req.target_rel_err,
    )
}

/// Shared series kernel for E_μ^(n)(z).
pub(crate) fn ml_series(
    mu: MuParam,
    z: &BigFloat,
    n: u32,
    digits: u32,
    target_rel_err: f64,
) -> Result<SeriesResult> {
    check_digits(digits)?;
    let mut opts = SumOptions::new(digits, target_rel_err);
    if is_negative(z) {
        opts.cancellation_hint = peak_log10_term(mu.get(), log10_abs(z), n);
    }
    let mut src = MLTermSource {
        mu,
        z_master: z.clone(),
        n,
        state: None,
    };
    sum_adaptive(&mut src, &opts)
}

struct MLState {
    p: usize,
    z: BigFloat,
    z_pow: BigFloat,
    coef: BigInt,
    k: usize,
    lattice: std::sync::Arc<GammaLattice>,
}

struct MLTermSource {
    mu: MuParam,
    z_master: BigFloat,
    n: u32,
    state: Option<MLState>,
}

impl TermSource for MLTermSource {
    fn begin(&mut self, digits: u32) {
        let p = bits_for(digits);
        let mut z = self.z_master.clone();
        // widening to the working precision is lossless
        let _ = z.set_precision(p.max(z.mantissa_max_bit_len().unwrap_or(p)), RM);
        self.state = Some(MLState {
            p,
            z,
            z_pow: bf_one(p),
            coef: factorial(self.n as u64),
            k: 0,
            lattice: GammaLattice::shared(self.mu, digits),
        });
    }

    fn next_term(&mut self) -> BigFloat {
        let st = self.state.as_mut().expect("begin not called");
        let n = self.n as u64;
        let num = mul(&bigint_to_bf(&st.coef, st.p), &st.z_pow, st.p);
        let term = div(&num, &st.lattice.get(st.k + self.n as usize), st.p);
        // advance: z^(k+1) and (k+1+n)!/(k+1)! = coef * (k+1+n) / (k+1)
        st.z_pow = mul(&st.z_pow, &st.z, st.p);
        let k1 = st.k as u64 + 1;
        st.coef *= k1 + n;
        st.coef /= k1; // exact
        st.k += 1;
        term
    }
}

/// Memoized kernel for callers that re-request the same derivative family
/// (the Bell double series needs E_μ^(n)(-x) for every outer n at every
/// moment order). Keyed on the exact bit pattern of z.
pub(crate) fn ml_series_cached(
    mu: MuParam,
    z: &BigFloat,
    n: u32,
    digits: u32,
    target_rel_err: f64,
) -> Result<SeriesResult> {
    use std::collections::HashMap;
    use std::sync::{Mutex, OnceLock};

    #[derive(PartialEq, Eq, Hash)]
    struct Key {
        mu: u64,
        n: u32,
        digits: u32,
        target: u64,
        z_neg: bool,
        z_exp: i32,
        z_words: Vec<u64>,
    }

    static CACHE: OnceLock<Mutex<HashMap<Key, SeriesResult>>> = OnceLock::new();
    let key = Key {
        mu: mu.key(),
        n,
        digits,
        target: target_rel_err.to_bits(),
        z_neg: z.is_negative(),
        z_exp: z.exponent().unwrap_or(0),
        z_words: z.mantissa_digits().map(|w| w.to_vec()).unwrap_or_default(),
    };
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let r = ml_series(mu, z, n, digits, target_rel_err)?;
    cache.lock().unwrap().insert(key, r.clone());
    Ok(r)
}

/// f64 estimate of log10 of the largest series term, used as a cancellation
/// hint for alternating arguments. Scans the term-magnitude profile.
fn peak_log10_term(mu: f64, log10_abs_z: f64, n: u32) -> f64 {
    if !log10_abs_z.is_finite() {
        return 0.0;
    }
    const LN10: f64 = std::f64::consts::LN_10;
    let mut peak = 0.0f64;
    let mut m = 0usize;
    let mut below_peak = 0usize;
    while m < 400_000 {
        let mf = m as f64;
        let lg = mf * log10_abs_z
            + (lgamma_f64(mf + n as f64 + 1.0) - lgamma_f64(mf + 1.0)) / LN10
            - lgamma_f64(mu * (mf + n as f64) + 1.0) / LN10;
        if lg > peak {
            peak = lg;
            below_peak = 0;
        } else {
            below_peak += 1;
            if below_peak > 64 && lg < peak - 40.0 {
                break;
            }
        }
        m += 1 + m / 16; // geometric-ish scan is enough for a hint
    }
    peak
}
