//! Fractional Stirling numbers of the second kind.
//!
//! S_μ(m,l) = c(m,l) / Γ(μl + 1) with the exact integer numerator
//! c(m,l) = Σ_{n=0}^{l} (-1)^(l-n) binom(l,n) n^m. The numerators are what
//! the triangle stores; μ enters only on evaluation, so table checks stay
//! exact and all rounding is deferred to the caller's requested precision.
//! The classic recurrence S(m,l) = l·S(m-1,l) + S(m-1,l-1) is kept as a
//! fully independent second route for cross-checks.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::combin::{factorial, int_pow, stirling_numerator};
use crate::error::{Error, Result};
use crate::gamma::gamma_real;
use crate::precision::{check_digits, MuParam, PrecReal};

/// Largest supported triangle size.
pub const MAX_TRIANGLE_M: u32 = 500;

/// Triangular array of exact numerators c(m,l), 0 ≤ l ≤ m ≤ m_max.
#[derive(Debug, Clone)]
pub struct StirlingTriangle {
    m_max: u32,
    rows: Vec<Vec<BigInt>>,
}

impl StirlingTriangle {
    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    /// c(m,l); `None` when m exceeds the triangle (entries with l > m are
    /// identically zero and are represented by the triangle shape).
    pub fn numerator(&self, m: u32, l: u32) -> Option<&BigInt> {
        self.rows.get(m as usize)?.get(l as usize)
    }

    pub fn row(&self, m: u32) -> Option<&[BigInt]> {
        self.rows.get(m as usize).map(|r| r.as_slice())
    }

    /// S_μ(m,l) evaluated from the stored numerator.
    pub fn evaluate(&self, mu: MuParam, m: u32, l: u32, digits: u32) -> Result<PrecReal> {
        check_digits(digits)?;
        if m > self.m_max {
            return Err(Error::Capacity(format!(
                "triangle holds m <= {}, requested m = {m}",
                self.m_max
            )));
        }
        if l > m {
            return Ok(PrecReal::zero(digits));
        }
        evaluate_numerator(&self.rows[m as usize][l as usize], mu, l, digits)
    }
}

fn check_m_range(m_max: u32) -> Result<()> {
    if !(1..=MAX_TRIANGLE_M).contains(&m_max) {
        return Err(Error::Domain(format!(
            "m_max must lie in [1, {MAX_TRIANGLE_M}], got {m_max}"
        )));
    }
    Ok(())
}

/// Builds the numerator triangle up to m_max via the alternating sums.
pub fn build_triangle(m_max: u32) -> Result<StirlingTriangle> {
    #[cfg(feature = "parallel")]
    {
        build_triangle_par(m_max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        build_triangle_seq(m_max)
    }
}

pub fn build_triangle_seq(m_max: u32) -> Result<StirlingTriangle> {
    check_m_range(m_max)?;
    let rows = (0..=m_max).map(triangle_row).collect();
    Ok(StirlingTriangle { m_max, rows })
}

#[cfg(feature = "parallel")]
pub fn build_triangle_par(m_max: u32) -> Result<StirlingTriangle> {
    use rayon::prelude::*;
    check_m_range(m_max)?;
    let rows = (0..=m_max).into_par_iter().map(triangle_row).collect();
    Ok(StirlingTriangle { m_max, rows })
}

/// One row of numerators; powers n^m are computed once per row and the
/// binomial row advances additively.
fn triangle_row(m: u32) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(m as usize + 1);
    row.push(if m == 0 { BigInt::one() } else { BigInt::zero() });
    if m == 0 {
        return row;
    }
    let pows: Vec<BigInt> = (0..=m).map(|n| int_pow(n as u64, m)).collect();
    let mut binom: Vec<BigInt> = vec![BigInt::one()];
    for l in 1..=m {
        let mut next = Vec::with_capacity(l as usize + 1);
        next.push(BigInt::one());
        for n in 1..l as usize {
            next.push(&binom[n - 1] + &binom[n]);
        }
        next.push(BigInt::one());
        binom = next;

        let mut acc = BigInt::zero();
        for n in 1..=l as usize {
            let term = &binom[n] * &pows[n];
            if (l as usize - n) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        row.push(acc);
    }
    row
}

/// S_μ(m,l) = c(m,l)/Γ(μl+1) without a prebuilt triangle.
///
/// Exact zeros and the Kronecker boundary are returned as exact values; at
/// μ = 1 the result is the exact integer S(m,l).
pub fn stirling_value(mu: MuParam, m: u32, l: u32, digits: u32) -> Result<PrecReal> {
    check_digits(digits)?;
    if m > MAX_TRIANGLE_M || l > MAX_TRIANGLE_M {
        return Err(Error::Domain(format!(
            "indices must not exceed {MAX_TRIANGLE_M}, got m={m}, l={l}"
        )));
    }
    if l > m {
        return Ok(PrecReal::zero(digits));
    }
    evaluate_numerator(&stirling_numerator(m, l), mu, l, digits)
}

fn evaluate_numerator(c: &BigInt, mu: MuParam, l: u32, digits: u32) -> Result<PrecReal> {
    if c.is_zero() {
        return Ok(PrecReal::zero(digits));
    }
    if mu.is_one() {
        // Γ(l+1) = l! exactly; c is divisible by l!
        let s = c / factorial(l as u64);
        return PrecReal::from_bigint(&s, digits);
    }
    let num = PrecReal::from_bigint(c, digits)?;
    let den = gamma_real(mu.get() * l as f64 + 1.0, digits)?;
    num.div(&den)
}

/// Classic Stirling numbers of the second kind by the recurrence
/// S(m,l) = l·S(m-1,l) + S(m-1,l-1), S(0,0) = 1; the independent oracle for
/// the identity c(m,l) = l!·S(m,l).
pub fn classic_stirling_triangle(m_max: u32) -> Result<Vec<Vec<BigInt>>> {
    check_m_range(m_max)?;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(m_max as usize + 1);
    rows.push(vec![BigInt::one()]);
    for m in 1..=m_max as usize {
        let prev = &rows[m - 1];
        let mut row = Vec::with_capacity(m + 1);
        row.push(BigInt::zero());
        for l in 1..=m {
            let stay = if l < prev.len() {
                &prev[l] * l
            } else {
                BigInt::zero()
            };
            row.push(stay + &prev[l - 1]);
        }
        rows.push(row);
    }
    Ok(rows)
}
